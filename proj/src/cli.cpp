#include "eigenflow/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "eigenflow/oracles.hpp"

namespace eigenflow {

namespace fs = std::filesystem;

namespace {

constexpr double kReachThreshold = 1.0 - 1e-6;
constexpr double kFitTolerance = 0.5;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T, class Parse>
T parse_enum(const std::string& value, const char* flag, Parse parse) {
  const auto v = parse(value);
  if (!v) throw UsageError(std::string("invalid value '") + value + "' for " + flag);
  return *v;
}

// Trajectory options shared by run and sweep.
struct TrajectoryFlags {
  std::string order = "solver";
  std::string phase = "max-entry";
  std::string ortho = "real-orthogonal";
  TrajectoryConfig defaults{};

  void add_to(CLI::App& app) {
    app.add_option("--order", order, "eigenvector column order: solver | magnitude")
        ->capture_default_str();
    app.add_option("--phase", phase, "eigenvector phase rule: max-entry | last-entry")
        ->capture_default_str();
    app.add_option("--ortho", ortho, "random factor: real-orthogonal | complex-unitary")
        ->capture_default_str();
    app.add_option("--converge-tol", defaults.converge_tol)->capture_default_str();
    app.add_option("--defect-tol", defaults.defect_tol)->capture_default_str();
    app.add_option("--cycle-window", defaults.cycle_window)->capture_default_str();
    app.add_option("--cycle-tol", defaults.cycle_tol)->capture_default_str();
  }

  TrajectoryConfig resolve(int max_iters) const {
    TrajectoryConfig t = defaults;
    t.max_iters = max_iters;
    t.gauge.order = parse_enum<EigenOrder>(order, "--order", parse_order);
    t.gauge.phase = parse_enum<PhaseConvention>(phase, "--phase", parse_phase);
    t.ortho_kind = parse_enum<OrthoKind>(ortho, "--ortho", parse_ortho);
    return t;
  }
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
  return f;
}

// ---- run ----------------------------------------------------------------

struct RunOptions {
  int dim = 0;
  std::string ensemble = "gaussian";
  std::string variant = "eigenbasis";
  std::uint64_t seed = 0;
  int max_iters = 2000;
  std::string out_path;
  bool loop_demo = false;
  TrajectoryFlags traj;
};

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  TrajectoryConfig config = o.traj.resolve(o.max_iters);
  const Variant variant = parse_enum<Variant>(o.variant, "--variant", parse_variant);
  ComplexMatrix initial;
  std::string ensemble_label;
  int dim = o.dim;
  if (o.loop_demo) {
    initial = loop_pair().first;
    ensemble_label = "loop-pair";
    dim = 2;
    config.gauge = {EigenOrder::Magnitude, PhaseConvention::LastEntry};
  } else {
    if (dim < 1) throw UsageError("--dim is required");
    const EnsembleKind kind = parse_enum<EnsembleKind>(o.ensemble, "--ensemble", parse_ensemble);
    initial = sample_matrix({kind, dim, o.seed});
    ensemble_label = std::string(to_string(kind));
  }
  config.validate();

  const Trajectory t = run_trajectory(initial, variant, config, o.seed);

  nlohmann::json echo = {{"command", "run"},       {"dim", dim},
                         {"ensemble", ensemble_label}, {"variant", to_string(variant)},
                         {"seed", o.seed},         {"max_iters", config.max_iters},
                         {"order", to_string(config.gauge.order)},
                         {"phase", to_string(config.gauge.phase)},
                         {"ortho_kind", to_string(config.ortho_kind)},
                         {"converge_tol", config.converge_tol},
                         {"defect_tol", config.defect_tol},
                         {"cycle_window", config.cycle_window},
                         {"cycle_tol", config.cycle_tol}};
  const TrajectoryLabel label{experiment_id(echo), variant, ensemble_label, dim, 0, o.seed};

  std::ostream* csv = &out;
  std::ofstream file;
  if (!o.out_path.empty() && o.out_path != "-") {
    file = open_output(o.out_path);
    csv = &file;
  }
  write_trajectory_header(*csv);
  write_trajectory_rows(*csv, label, t.records);

  std::ostream& report = csv == &out ? err : out;
  const auto& last = t.records.back();
  report << "status " << to_string(t.final_status) << " after " << last.iter
         << " iterations, det_gram " << format_double(last.metrics.det_gram) << ", frob_dev "
         << format_double(last.metrics.frob_dev) << '\n';
  if (t.cycle_partner) {
    report << "cycle: iterate " << last.iter << " matches iterate " << *t.cycle_partner
           << " (distance " << format_double(t.cycle_distance) << ")\n";
  }
  if (!t.diagnostic.empty()) report << "diagnostic: " << t.diagnostic << '\n';
  return exit_code_for(t.final_status);
}

// ---- sweep --------------------------------------------------------------

struct SweepOptions {
  std::string dims = "2..6";
  int count = 100;
  std::string ensemble = "gaussian";
  std::string variant = "eigenbasis";
  std::uint64_t seed = 0;
  int max_iters = 2000;
  int workers = 0;
  std::string out_dir;
  std::string from_manifest;
  TrajectoryFlags traj;
};

ExperimentConfig sweep_config(const SweepOptions& o) {
  if (!o.from_manifest.empty()) {
    std::ifstream in(o.from_manifest);
    if (!in) throw Error(ErrorCode::MalformedInput, "cannot read " + o.from_manifest);
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedInput, std::string("manifest: ") + e.what());
    }
    if (!manifest.contains("config_echo")) {
      throw Error(ErrorCode::MalformedInput, "manifest has no config_echo");
    }
    return config_from_json(manifest["config_echo"]);
  }
  ExperimentConfig c;
  c.variant = parse_enum<Variant>(o.variant, "--variant", parse_variant);
  c.ensemble = parse_enum<EnsembleKind>(o.ensemble, "--ensemble", parse_ensemble);
  c.dims = parse_dims(o.dims);
  c.matrices_per_dim = o.count;
  c.max_iters = o.max_iters;
  c.base_seed = o.seed;
  c.workers = o.workers;
  c.trajectory = o.traj.resolve(o.max_iters);
  return c;
}

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  const ExperimentConfig config = sweep_config(o);
  config.validate();
  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::InvalidConfig, "cannot create " + dir.string());

  const std::string started = utc_now();
  const SweepResult result = run_sweep(config);
  const RateTable rates = fit_sweep(result);
  const std::string finished = utc_now();

  const nlohmann::json echo = config_to_json(config);
  const std::string id = experiment_id(echo);
  std::vector<std::string> outputs;

  for (const auto& [dim, list] : result.per_dim) {
    const std::string name = "trajectories_n" + std::to_string(dim) + ".csv";
    std::ofstream f = open_output(dir / name);
    write_trajectory_header(f);
    for (const auto& s : list) {
      const TrajectoryLabel label{id, config.variant, std::string(to_string(config.ensemble)),
                                  dim, s.index, s.seed};
      write_trajectory_rows(f, label, s.records);
    }
    outputs.push_back(name);
  }
  {
    std::ofstream f = open_output(dir / "aggregate.csv");
    write_aggregate_csv(f, config.variant, config.ensemble, result.aggregate);
    outputs.emplace_back("aggregate.csv");
  }
  {
    std::ofstream f = open_output(dir / "aggregate_all.csv");
    write_aggregate_csv(f, config.variant, config.ensemble, result.aggregate_all);
    outputs.emplace_back("aggregate_all.csv");
  }
  {
    std::ofstream f = open_output(dir / "rates.csv");
    write_rates_csv(f, config.variant, config.ensemble, rates);
    outputs.emplace_back("rates.csv");
  }
  const std::string summary = format_sweep_summary(result, rates);
  {
    std::ofstream f = open_output(dir / "summary.txt");
    f << summary;
    outputs.emplace_back("summary.txt");
  }
  outputs.emplace_back("manifest.json");
  const nlohmann::json manifest = {
      {"tool_version", EIGENFLOW_VERSION},
      {"experiment_id", id},
      {"config_echo", echo},
      {"started", started},
      {"finished", finished},
      {"outputs", outputs},
  };
  {
    std::ofstream f = open_output(dir / "manifest.json");
    f << manifest.dump(2) << '\n';
  }
  out << summary;
  return exit_code::kOk;
}

// ---- fit ----------------------------------------------------------------

int cmd_fit(const std::string& in_path, const std::string& window_spec, std::ostream& out) {
  std::optional<FitWindow> window;
  if (!window_spec.empty()) {
    const auto colon = window_spec.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("no colon");
      std::size_t used_a = 0;
      std::size_t used_b = 0;
      const std::string a = window_spec.substr(0, colon);
      const std::string b = window_spec.substr(colon + 1);
      window = FitWindow{std::stoi(a, &used_a), std::stoi(b, &used_b)};
      if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw UsageError("--window expects FIRST:LAST, got '" + window_spec + "'");
    }
  }
  std::ifstream in(in_path);
  if (!in) throw Error(ErrorCode::MalformedInput, "cannot read " + in_path);
  const AggregateTable table = read_aggregate_csv(in);

  bool all_within = true;
  out << "dim  fitted_t  conjectured_t  residual  window\n";
  for (const auto& [dim, series] : table.mean_lnld) {
    const auto conjectured = conjectured_rate_exponent(table.variant, dim);
    try {
      const RateFit f = fit_rate(series, window.value_or(default_fit_window(series.size())));
      out << std::setw(3) << dim << "  " << std::setw(8) << std::fixed << std::setprecision(4)
          << f.fitted_t << "  " << std::setw(13);
      if (conjectured) {
        out << *conjectured;
      } else {
        out << "-";
      }
      out << "  " << std::scientific << std::setprecision(3) << f.residual << "  ["
          << f.window.first << ", " << f.window.last << "]";
      out.unsetf(std::ios::floatfield);
      if (conjectured && std::abs(f.fitted_t - *conjectured) > kFitTolerance) {
        all_within = false;
        out << "  outside +-" << kFitTolerance;
      }
      out << '\n';
    } catch (const Error& e) {
      out << std::setw(3) << dim << "  fit failed: " << e.what() << '\n';
      if (conjectured) all_within = false;
    }
  }
  return all_within ? exit_code::kOk : exit_code::kFailure;
}

// ---- oracle -------------------------------------------------------------

void print_report(const OracleReport& r, std::ostream& out) {
  out << r.name << ": " << (r.passed ? "PASS" : "FAIL") << "  steps " << r.steps_checked
      << "  max_error " << format_double(r.max_angle_error) << "  limit_error "
      << format_double(r.limit_error) << '\n';
  for (const auto& n : r.notes) out << "    " << n << '\n';
  if (r.failure) out << "    first failure: " << *r.failure << '\n';
}

int cmd_oracle(const std::string& which, std::optional<int> steps, int cases,
               std::uint64_t seed, std::ostream& out) {
  static const std::vector<std::string> kNames = {
      "t1", "tn", "t3", "special2", "loop", "discontinuity", "corollary", "all"};
  if (std::find(kNames.begin(), kNames.end(), which) == kNames.end()) {
    throw UsageError("invalid value '" + which + "' for --which");
  }
  if (steps && *steps < 1) throw UsageError("--steps must be positive");
  const bool all = which == "all";
  std::vector<OracleReport> reports;
  if (all || which == "t1") reports.push_back(verify_t1(steps.value_or(50)));
  if (all || which == "tn") {
    for (int n = 2; n <= 6; ++n) reports.push_back(verify_last_column(n, steps.value_or(60), seed));
  }
  if (all || which == "t3") reports.push_back(verify_t3(steps.value_or(60), seed));
  if (all || which == "special2") reports.push_back(verify_special2x2(cases, seed));
  if (all || which == "loop") reports.push_back(verify_loop());
  if (all || which == "discontinuity") reports.push_back(verify_discontinuity());
  if (all || which == "corollary") reports.push_back(verify_corollary(40, 80, seed));

  bool ok = true;
  for (const auto& r : reports) {
    print_report(r, out);
    ok = ok && r.passed;
  }
  return ok ? exit_code::kOk : exit_code::kFailure;
}

}  // namespace

int exit_code_for(Status status) {
  switch (status) {
    case Status::Converged: return exit_code::kOk;
    case Status::Exhausted: return exit_code::kExhausted;
    case Status::Defective: return exit_code::kDefective;
    case Status::Cycling: return exit_code::kCycling;
    case Status::Running: break;
  }
  return exit_code::kFailure;
}

std::vector<int> parse_dims(const std::string& spec) {
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) {
      throw Error(ErrorCode::InvalidConfig, "bad dimension list '" + spec + "'");
    }
    return v;
  };
  std::vector<int> dims;
  if (const auto dots = spec.find(".."); dots != std::string::npos) {
    const int lo = to_int(spec.substr(0, dots));
    const int hi = to_int(spec.substr(dots + 2));
    if (hi < lo) throw Error(ErrorCode::InvalidConfig, "empty dimension range '" + spec + "'");
    for (int d = lo; d <= hi; ++d) dims.push_back(d);
    return dims;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(to_int(item));
  if (dims.empty()) throw Error(ErrorCode::InvalidConfig, "empty dimension list");
  return dims;
}

std::string format_sweep_summary(const SweepResult& result, const RateTable& rates) {
  const ExperimentConfig& c = result.config;
  std::ostringstream os;
  os << "variant " << to_string(c.variant) << ", ensemble " << to_string(c.ensemble) << ", "
     << c.matrices_per_dim << " matrices per dim, " << c.max_iters << " iterations, seed "
     << c.base_seed << "\n\n";
  os << "dim  converged  defective  cycling  exhausted  reach(det>1-1e-6)  median_det  "
        "median_iters\n";
  for (const auto& [dim, list] : result.per_dim) {
    const StatusCounts& n = result.counts.at(dim);
    os << std::setw(3) << dim << std::setw(11) << n.converged << std::setw(11) << n.defective
       << std::setw(9) << n.cycling << std::setw(11) << n.exhausted << std::fixed
       << std::setprecision(3) << std::setw(19) << fraction_reaching(list, kReachThreshold)
       << std::setprecision(6) << std::setw(12) << median_final_det(list)
       << std::setprecision(1) << std::setw(14)
       << median_iterations_to_convergence(list, c.max_iters) << '\n';
    os.unsetf(std::ios::floatfield);
    if (n.converged + 0.0 < 0.05 * n.total()) os << "     no convergence at dim " << dim << '\n';
  }
  os << "\ndim  fitted_t  conjectured_t  residual\n";
  for (const auto& f : rates.fits) {
    os << std::setw(3) << f.dim << "  " << std::fixed << std::setprecision(4) << std::setw(8)
       << f.fitted_t << "  " << std::setw(13);
    if (f.conjectured_t) {
      os << *f.conjectured_t;
    } else {
      os << "-";
    }
    os << "  " << std::scientific << std::setprecision(3) << f.residual << '\n';
    os.unsetf(std::ios::floatfield);
  }
  for (const auto& [dim, why] : rates.failures) {
    os << std::setw(3) << dim << "  no fit: " << why << '\n';
  }
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Iterated eigenvector-matrix dynamics: runs, sweeps, rate fits, oracles",
               "eigenflow"};
  app.set_version_flag("--version", EIGENFLOW_VERSION);
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "iterate one matrix and write its trajectory CSV");
  run_cmd->add_option("--dim", run.dim, "matrix dimension");
  run_cmd->add_option("--ensemble", run.ensemble,
                      "uniform01 | gaussian | complex-ginibre | haar-orthogonal | haar-unitary | "
                      "upper-triangular-constrained")
      ->capture_default_str();
  run_cmd->add_option("--variant", run.variant, "eigenbasis | similarity | product")
      ->capture_default_str();
  run_cmd->add_option("--seed", run.seed)->capture_default_str();
  run_cmd->add_option("--max-iters", run.max_iters)->capture_default_str();
  run_cmd->add_option("--out", run.out_path, "CSV path (default stdout)");
  run_cmd->add_flag("--loop-demo", run.loop_demo,
                    "iterate [[1, sqrt3/2], [0, 1/2]] under the last-entry sign rule");
  run.traj.add_to(*run_cmd);

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "ensemble sweep over dimensions");
  sweep_cmd->add_option("--dims", sweep.dims, "range A..B or list A,B,C")->capture_default_str();
  sweep_cmd->add_option("--count", sweep.count, "matrices per dimension")->capture_default_str();
  sweep_cmd->add_option("--ensemble", sweep.ensemble)->capture_default_str();
  sweep_cmd->add_option("--variant", sweep.variant)->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed, "base seed")->capture_default_str();
  sweep_cmd->add_option("--max-iters", sweep.max_iters)->capture_default_str();
  sweep_cmd->add_option("--workers", sweep.workers, "0: OpenMP default")->capture_default_str();
  sweep_cmd->add_option("--out-dir", sweep.out_dir)->required();
  sweep_cmd->add_option("--from-manifest", sweep.from_manifest,
                        "rerun the config recorded in a manifest.json");
  sweep.traj.add_to(*sweep_cmd);

  std::string fit_in;
  std::string fit_window;
  auto* fit_cmd = app.add_subcommand("fit", "fit rate exponents to an aggregate CSV");
  fit_cmd->add_option("--in", fit_in, "aggregate CSV")->required();
  fit_cmd->add_option("--window", fit_window, "FIRST:LAST iterations (default 10%..80%)");

  std::string which = "all";
  std::optional<int> steps;
  int cases = 100;
  std::uint64_t oracle_seed = 1;
  auto* oracle_cmd = app.add_subcommand("oracle", "check constrained iterations against closed forms");
  oracle_cmd->add_option("--which", which,
                         "t1 | tn | t3 | special2 | loop | discontinuity | corollary | all")
      ->capture_default_str();
  oracle_cmd->add_option("--steps", steps, "iterations for t1, tn and t3");
  oracle_cmd->add_option("--cases", cases, "random starts for special2")->capture_default_str();
  oracle_cmd->add_option("--seed", oracle_seed)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kOk;
  } catch (const CLI::CallForVersion&) {
    out << EIGENFLOW_VERSION << '\n';
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "eigenflow: " << e.what() << '\n';
    return exit_code::kUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out);
    if (fit_cmd->parsed()) return cmd_fit(fit_in, fit_window, out);
    if (oracle_cmd->parsed()) return cmd_oracle(which, steps, cases, oracle_seed, out);
  } catch (const UsageError& e) {
    err << "eigenflow: " << e.what() << '\n';
    return exit_code::kUsage;
  } catch (const Error& e) {
    err << "eigenflow: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::InvalidConfig:
      case ErrorCode::UnsupportedDim: return exit_code::kUsage;
      case ErrorCode::MalformedInput: return exit_code::kMalformed;
      default: return exit_code::kFailure;
    }
  } catch (const std::exception& e) {
    err << "eigenflow: " << e.what() << '\n';
    return exit_code::kFailure;
  }
  return exit_code::kUsage;
}

}  // namespace eigenflow
