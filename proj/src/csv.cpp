#include "eigenflow/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "eigenflow/seed.hpp"

namespace eigenflow {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedInput, what);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <class Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    malformed("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    malformed("bad number '" + std::string(s) + "'");
  }
  return v;
}

void write_trajectory_header(std::ostream& out) { out << kTrajectoryHeader << '\n'; }

void write_trajectory_rows(std::ostream& out, const TrajectoryLabel& label,
                           const std::vector<TrajectoryRecord>& records) {
  const std::string prefix = label.experiment_id + ',' + std::string(to_string(label.variant)) +
                             ',' + label.ensemble + ',' +
                             std::to_string(label.dim) + ',' +
                             std::to_string(label.matrix_index) + ',' +
                             std::to_string(label.seed) + ',';
  for (const auto& r : records) {
    out << prefix << r.iter << ',' << format_double(r.metrics.det_gram) << ',';
    if (r.log_neg_log_det) out << format_double(*r.log_neg_log_det);
    out << ',' << format_double(r.metrics.offdiag_max) << ','
        << format_double(r.metrics.frob_dev) << ',' << format_double(r.metrics.min_singular)
        << ',' << to_string(r.status) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, Variant variant, EnsembleKind ensemble,
                         const std::map<int, AggregateSeries>& series) {
  out << kAggregateHeader << '\n';
  for (const auto& [dim, a] : series) {
    for (std::size_t k = 0; k < a.mean_lnld.size(); ++k) {
      out << to_string(variant) << ',' << to_string(ensemble) << ',' << dim << ',' << k << ','
          << format_double(a.mean_lnld[k]) << ',' << a.valid_count[k] << ','
          << a.excluded_defective << ',' << a.excluded_cycling << '\n';
    }
  }
}

AggregateTable read_aggregate_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || chomp(line) != kAggregateHeader) {
    malformed("missing or wrong aggregate header");
  }
  AggregateTable t;
  bool first = true;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = chomp(line);
    if (row.empty()) continue;
    const auto cells = split(row);
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (cells.size() != 8) malformed(where + "expected 8 cells");
    const auto variant = parse_variant(cells[0]);
    const auto ensemble = parse_ensemble(cells[1]);
    if (!variant) malformed(where + "unknown variant");
    if (!ensemble) malformed(where + "unknown ensemble");
    if (first) {
      t.variant = *variant;
      t.ensemble = *ensemble;
      first = false;
    } else if (*variant != t.variant || *ensemble != t.ensemble) {
      malformed(where + "mixed variants or ensembles");
    }
    const int dim = parse_int<int>(cells[2], "dim");
    const auto iter = parse_int<std::size_t>(cells[3], "iter");
    auto& series = t.mean_lnld[dim];
    if (iter != series.size()) malformed(where + "iterations out of sequence");
    const double v = parse_double(cells[4]);
    if (!std::isfinite(v)) malformed(where + "non-finite mean_lnld");
    series.push_back(v);
    parse_int<int>(cells[5], "valid_count");
    parse_int<int>(cells[6], "excluded_defective");
    parse_int<int>(cells[7], "excluded_cycling");
  }
  if (first) malformed("aggregate CSV has no rows");
  return t;
}

void write_rates_csv(std::ostream& out, Variant variant, EnsembleKind ensemble,
                     const RateTable& table) {
  out << kRatesHeader << '\n';
  for (const auto& f : table.fits) {
    out << to_string(variant) << ',' << to_string(ensemble) << ',' << f.dim << ','
        << format_double(f.slope) << ',' << format_double(f.intercept) << ','
        << format_double(f.fitted_t) << ',';
    if (f.conjectured_t) out << format_double(*f.conjectured_t);
    out << ',' << f.window.first << ',' << f.window.last << ',' << format_double(f.residual)
        << '\n';
  }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  const TrajectoryConfig t = c.resolved_trajectory();
  return {
      {"variant", to_string(c.variant)},
      {"ensemble", to_string(c.ensemble)},
      {"dims", c.dims},
      {"matrices_per_dim", c.matrices_per_dim},
      {"max_iters", c.max_iters},
      {"base_seed", c.base_seed},
      {"workers", c.workers},
      {"dim_cap", c.dim_cap},
      {"trajectory",
       {
           {"converge_tol", t.converge_tol},
           {"defect_tol", t.defect_tol},
           {"cycle_window", t.cycle_window},
           {"cycle_tol", t.cycle_tol},
           {"residual_tol", t.residual_tol},
           {"ortho_kind", to_string(t.ortho_kind)},
           {"order", to_string(t.gauge.order)},
           {"phase", to_string(t.gauge.phase)},
       }},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    const auto variant = parse_variant(j.at("variant").get<std::string>());
    const auto ensemble = parse_ensemble(j.at("ensemble").get<std::string>());
    if (!variant || !ensemble) malformed("unknown variant or ensemble in config");
    c.variant = *variant;
    c.ensemble = *ensemble;
    c.dims = j.at("dims").get<std::vector<int>>();
    c.matrices_per_dim = j.at("matrices_per_dim").get<int>();
    c.max_iters = j.at("max_iters").get<int>();
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    c.workers = j.value("workers", 0);
    c.dim_cap = j.value("dim_cap", c.dim_cap);

    const auto& t = j.at("trajectory");
    c.trajectory.max_iters = c.max_iters;
    c.trajectory.converge_tol = t.at("converge_tol").get<double>();
    c.trajectory.defect_tol = t.at("defect_tol").get<double>();
    c.trajectory.cycle_window = t.at("cycle_window").get<int>();
    c.trajectory.cycle_tol = t.at("cycle_tol").get<double>();
    c.trajectory.residual_tol = t.at("residual_tol").get<double>();
    const auto ortho = parse_ortho(t.at("ortho_kind").get<std::string>());
    const auto order = parse_order(t.at("order").get<std::string>());
    const auto phase = parse_phase(t.at("phase").get<std::string>());
    if (!ortho || !order || !phase) malformed("unknown trajectory option in config");
    c.trajectory.ortho_kind = *ortho;
    c.trajectory.gauge = {*order, *phase};
    return c;
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("config: ") + e.what());
  }
}

std::string experiment_id(const nlohmann::json& config_echo) {
  nlohmann::json keyed = config_echo;
  keyed.erase("workers");  // does not affect results
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : keyed.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mix64(h)));
  return buf;
}

}  // namespace eigenflow
