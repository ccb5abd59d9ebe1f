#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "eigenflow/cli.hpp"

using namespace eigenflow;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eigenflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> cells_of(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK(parse_double("-inf") == -HUGE_VAL);
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
}

TEST_CASE("parse_dims") {
  CHECK(parse_dims("2..5") == std::vector<int>{2, 3, 4, 5});
  CHECK(parse_dims("7") == std::vector<int>{7});
  CHECK(parse_dims("2,4,8") == std::vector<int>{2, 4, 8});
  CHECK_THROWS_AS(parse_dims("5..2"), Error);
  CHECK_THROWS_AS(parse_dims("a..3"), Error);
  CHECK_THROWS_AS(parse_dims("3,,4"), Error);
}

TEST_CASE("exit codes follow the terminal status") {
  CHECK(exit_code_for(Status::Converged) == 0);
  CHECK(exit_code_for(Status::Exhausted) == 2);
  CHECK(exit_code_for(Status::Defective) == 3);
  CHECK(exit_code_for(Status::Cycling) == 4);
}

TEST_CASE("run: gaussian n = 3") {
  const CliResult r = cli({"run", "--dim", "3", "--ensemble", "gaussian", "--variant",
                           "eigenbasis", "--seed", "1"});
  CHECK(r.code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == kTrajectoryHeader);
  const auto last = cells_of(lines.back());
  REQUIRE(last.size() == 13);
  CHECK(last[12] == "converged");
  CHECK(parse_double(last[7]) > 1 - 1e-6);
  CHECK(last[8].empty());  // log(-log 1) undefined
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = cells_of(lines[i]);
    CHECK(cells[6] == std::to_string(i - 1));
    CHECK(cells[0] == last[0]);
  }
}

TEST_CASE("run: unitary start converges at once") {
  const fs::path dir = scratch_dir("run_haar");
  const CliResult r = cli({"run", "--dim", "2", "--ensemble", "haar-orthogonal", "--out",
                           (dir / "t.csv").string()});
  CHECK(r.code == 0);
  CHECK(lines_of(slurp(dir / "t.csv")).size() <= 3);
  CHECK(r.out.find("converged") != std::string::npos);
}

TEST_CASE("run: exit codes per status") {
  CHECK(cli({"run", "--loop-demo"}).code == exit_code::kCycling);
  CHECK(cli({"run", "--dim", "8", "--seed", "3", "--max-iters", "30"}).code ==
        exit_code::kExhausted);
  const CliResult bad = cli({"run", "--dim", "3", "--variant", "rotation"});
  CHECK(bad.code == exit_code::kUsage);
  CHECK(bad.err.find("--variant") != std::string::npos);
  CHECK(cli({"run", "--dim", "1"}).code == exit_code::kUsage);
  CHECK(cli({"run"}).code == exit_code::kUsage);
  CHECK(cli({"run", "--dim", "x"}).code == exit_code::kUsage);
  CHECK(cli({"run", "--dim", "3", "--cycle-window", "1"}).code == exit_code::kUsage);
  CHECK(cli({"frobnicate"}).code == exit_code::kUsage);
  CHECK(cli({}).code == exit_code::kUsage);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("run: loop demo rows") {
  const CliResult r = cli({"run", "--loop-demo"});
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 4);
  CHECK(cells_of(lines[1])[2] == "loop-pair");
  CHECK(std::abs(parse_double(cells_of(lines[2])[7]) - 0.25) < 1e-14);
  CHECK(cells_of(lines[3])[12] == "cycling");
}

TEST_CASE("sweep: outputs, manifest rerun and fit round trip") {
  const fs::path dir = scratch_dir("sweep");
  const CliResult r = cli({"sweep", "--dims", "2..4", "--count", "16", "--seed", "9",
                           "--max-iters", "600", "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  for (const char* name : {"trajectories_n2.csv", "trajectories_n3.csv", "trajectories_n4.csv",
                           "aggregate.csv", "aggregate_all.csv", "rates.csv", "summary.txt",
                           "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(dir / name), name);
  }
  CHECK(r.out == slurp(dir / "summary.txt"));

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["tool_version"] == EIGENFLOW_VERSION);
  CHECK(manifest["config_echo"]["matrices_per_dim"] == 16);
  CHECK(manifest["outputs"].size() == 8);
  CHECK(manifest.contains("started"));
  CHECK(manifest.contains("finished"));

  const auto traj = lines_of(slurp(dir / "trajectories_n3.csv"));
  CHECK(traj[0] == kTrajectoryHeader);
  CHECK(cells_of(traj[1])[0] == manifest["experiment_id"]);
  CHECK(lines_of(slurp(dir / "aggregate.csv"))[0] == kAggregateHeader);

  SUBCASE("rerun from manifest reproduces every CSV") {
    const fs::path again = scratch_dir("sweep_again");
    REQUIRE(cli({"sweep", "--from-manifest", (dir / "manifest.json").string(), "--out-dir",
                 again.string()})
                .code == 0);
    for (const char* name : {"trajectories_n2.csv", "trajectories_n3.csv", "trajectories_n4.csv",
                             "aggregate.csv", "aggregate_all.csv", "rates.csv"}) {
      CHECK_MESSAGE(slurp(dir / name) == slurp(again / name), name);
    }
  }

  SUBCASE("aggregate CSV reproduces in-process fits") {
    ExperimentConfig c = config_from_json(manifest["config_echo"]);
    const SweepResult result = run_sweep(c);
    const RateTable in_process = fit_sweep(result);
    std::ifstream in(dir / "aggregate.csv");
    const AggregateTable table = read_aggregate_csv(in);
    CHECK(table.variant == Variant::Eigenbasis);
    CHECK(table.ensemble == EnsembleKind::Gaussian);
    for (const auto& f : in_process.fits) {
      const auto& series = table.mean_lnld.at(f.dim);
      const RateFit g = fit_rate(series, default_fit_window(series.size()));
      CHECK(std::abs(g.fitted_t - f.fitted_t) <= 1e-12);
      CHECK(std::abs(g.slope - f.slope) <= 1e-12);
      CHECK(std::abs(g.residual - f.residual) <= 1e-12);
    }
    const CliResult fit = cli({"fit", "--in", (dir / "aggregate.csv").string()});
    CHECK((fit.code == 0 || fit.code == 1));
    CHECK(lines_of(fit.out).size() == 1 + in_process.fits.size());
  }
}

TEST_CASE("sweep: usage errors") {
  const fs::path dir = scratch_dir("sweep_bad");
  CHECK(cli({"sweep", "--dims", "1..3", "--out-dir", dir.string()}).code == exit_code::kUsage);
  CHECK(cli({"sweep", "--dims", "2..3", "--ensemble", "nope", "--out-dir", dir.string()}).code ==
        exit_code::kUsage);
  CHECK(cli({"sweep", "--dims", "2..3"}).code == exit_code::kUsage);
  std::ofstream(dir / "bad.json") << "{\"config_echo\": {\"variant\": 3}}";
  CHECK(cli({"sweep", "--from-manifest", (dir / "bad.json").string(), "--out-dir",
             dir.string()})
            .code == exit_code::kMalformed);
}

TEST_CASE("fit: synthetic input") {
  const fs::path dir = scratch_dir("fit");
  {
    std::ofstream f(dir / "agg.csv");
    f << kAggregateHeader << '\n';
    for (int dim = 2; dim <= 4; ++dim) {
      for (int k = 0; k < 100; ++k) {
        const double y = 0.3 - k / std::ldexp(1.0, dim - 2);
        f << "eigenbasis,gaussian," << dim << ',' << k << ',' << format_double(y) << ",10,0,0\n";
      }
    }
  }
  const CliResult ok = cli({"fit", "--in", (dir / "agg.csv").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("0.0000e+00") == std::string::npos);
  CHECK(ok.out.find("1.0000") != std::string::npos);

  const CliResult windowed = cli({"fit", "--in", (dir / "agg.csv").string(), "--window", "0:50"});
  CHECK(windowed.code == 0);
  CHECK(windowed.out.find("[0, 50]") != std::string::npos);
  CHECK(cli({"fit", "--in", (dir / "agg.csv").string(), "--window", "50"}).code ==
        exit_code::kUsage);

  {
    std::ofstream f(dir / "slow.csv");
    f << kAggregateHeader << '\n';
    for (int k = 0; k < 100; ++k) {
      f << "eigenbasis,gaussian,3," << k << ',' << format_double(-k / 16.0) << ",10,0,0\n";
    }
  }
  CHECK(cli({"fit", "--in", (dir / "slow.csv").string()}).code == exit_code::kFailure);
}

TEST_CASE("fit: malformed input") {
  const fs::path dir = scratch_dir("fit_bad");
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return (dir / name).string();
  };
  const std::string h = std::string(kAggregateHeader) + "\n";
  CHECK(cli({"fit", "--in", write("a.csv", "dim,t\n1,2\n")}).code == exit_code::kMalformed);
  CHECK(cli({"fit", "--in", write("b.csv", h)}).code == exit_code::kMalformed);
  CHECK(cli({"fit", "--in", write("c.csv", h + "eigenbasis,gaussian,3,1,0.5,1,0,0\n")}).code ==
        exit_code::kMalformed);
  CHECK(cli({"fit", "--in", write("d.csv", h + "eigenbasis,gaussian,3,0,abc,1,0,0\n")}).code ==
        exit_code::kMalformed);
  CHECK(cli({"fit", "--in", write("e.csv", h + "eigenbasis,gaussian,3,0,0.5,1,0\n")}).code ==
        exit_code::kMalformed);
  CHECK(cli({"fit", "--in", write("f.csv", h + "eigenbasis,gaussian,3,0,0.5,1,0,0\n" +
                                               "product,gaussian,3,1,0.5,1,0,0\n")})
            .code == exit_code::kMalformed);
  CHECK(cli({"fit", "--in", (dir / "missing.csv").string()}).code == exit_code::kMalformed);
}

TEST_CASE("oracle command") {
  const CliResult t1 = cli({"oracle", "--which", "t1", "--steps", "50"});
  CHECK(t1.code == 0);
  CHECK(t1.out.find("t1: PASS") != std::string::npos);
  CHECK(cli({"oracle", "--which", "t3"}).code == 0);
  CHECK(cli({"oracle", "--which", "loop"}).code == 0);
  CHECK(cli({"oracle", "--which", "nope"}).code == exit_code::kUsage);
  CHECK(cli({"oracle", "--which", "t1", "--steps", "0"}).code == exit_code::kUsage);
  // too few steps to reach the limit: the first failing assertion is named
  const CliResult short_run = cli({"oracle", "--which", "t1", "--steps", "3"});
  CHECK(short_run.code == exit_code::kFailure);
  CHECK(short_run.out.find("first failure: limit error") != std::string::npos);
}

TEST_CASE("config json round trip") {
  ExperimentConfig c;
  c.variant = Variant::Product;
  c.ensemble = EnsembleKind::HaarUnitary;
  c.dims = {3, 5};
  c.base_seed = 0xfedcba9876543210ULL;
  c.trajectory.cycle_tol = 3.3e-9;
  c.trajectory.gauge = {EigenOrder::Magnitude, PhaseConvention::LastEntry};
  c.trajectory.ortho_kind = OrthoKind::ComplexUnitary;
  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.base_seed == c.base_seed);
  CHECK(back.trajectory.cycle_tol == c.trajectory.cycle_tol);
  CHECK(experiment_id(config_to_json(c)).size() == 16);

  ExperimentConfig w = c;
  w.workers = 7;
  CHECK(experiment_id(config_to_json(w)) == experiment_id(config_to_json(c)));
  w.base_seed = 1;
  CHECK(experiment_id(config_to_json(w)) != experiment_id(config_to_json(c)));
  CHECK_THROWS_AS(config_from_json(nlohmann::json::object()), Error);
}
