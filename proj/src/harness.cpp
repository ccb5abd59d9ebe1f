#include "eigenflow/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "eigenflow/seed.hpp"

namespace eigenflow {

void ExperimentConfig::validate() const {
  if (dims.empty()) throw Error(ErrorCode::InvalidConfig, "no dimensions requested");
  for (int d : dims) {
    if (d < 2) throw Error(ErrorCode::UnsupportedDim, "dimension " + std::to_string(d) + " < 2");
    if (d > dim_cap) {
      throw Error(ErrorCode::InvalidConfig, "dimension " + std::to_string(d) +
                                                " exceeds cap " + std::to_string(dim_cap));
    }
  }
  if (std::set<int>(dims.begin(), dims.end()).size() != dims.size()) {
    throw Error(ErrorCode::InvalidConfig, "duplicate dimensions");
  }
  if (matrices_per_dim < 1) throw Error(ErrorCode::InvalidConfig, "matrices_per_dim < 1");
  resolved_trajectory().validate();
}

TrajectoryConfig ExperimentConfig::resolved_trajectory() const {
  TrajectoryConfig t = trajectory;
  t.max_iters = max_iters;
  return t;
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv("EIGENFLOW_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  if (requested > 0) return requested;
  return omp_get_max_threads();
}

TrajectorySummary run_sweep_item(const ExperimentConfig& config, int dim, int index) {
  TrajectorySummary s;
  s.index = index;
  s.seed = trajectory_seed(config.base_seed, dim, index);
  const ComplexMatrix initial = sample_matrix({config.ensemble, dim, s.seed});
  Trajectory t = run_trajectory(initial, config.variant, config.resolved_trajectory(), s.seed);
  s.final_status = t.final_status;
  s.records = std::move(t.records);
  s.diagnostic = std::move(t.diagnostic);
  return s;
}

namespace {

struct WorkItem {
  int dim;
  int index;
};

std::vector<WorkItem> work_items(const ExperimentConfig& config) {
  std::vector<WorkItem> items;
  items.reserve(config.dims.size() * static_cast<std::size_t>(config.matrices_per_dim));
  for (int dim : config.dims) {
    for (int i = 0; i < config.matrices_per_dim; ++i) items.push_back({dim, i});
  }
  return items;
}

SweepResult assemble(const ExperimentConfig& config, const std::vector<WorkItem>& items,
                     std::vector<TrajectorySummary>&& summaries) {
  SweepResult r;
  r.config = config;
  for (std::size_t k = 0; k < items.size(); ++k) {
    r.per_dim[items[k].dim].push_back(std::move(summaries[k]));
  }
  for (const auto& [dim, list] : r.per_dim) {
    StatusCounts c;
    for (const auto& s : list) {
      switch (s.final_status) {
        case Status::Converged: ++c.converged; break;
        case Status::Defective: ++c.defective; break;
        case Status::Cycling: ++c.cycling; break;
        default: ++c.exhausted; break;
      }
    }
    r.counts[dim] = c;
    for (bool include_excluded : {false, true}) {
      try {
        AggregateSeries a = aggregate_trajectories(list, dim, include_excluded);
        (include_excluded ? r.aggregate_all : r.aggregate)[dim] = std::move(a);
      } catch (const Error&) {
        // InsufficientData: the dimension simply has no aggregate series
      }
    }
  }
  return r;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  const std::vector<WorkItem> items = work_items(config);
  std::vector<TrajectorySummary> summaries(items.size());
  const int workers = resolve_workers(config.workers);
  const auto count = static_cast<std::int64_t>(items.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::int64_t k = 0; k < count; ++k) {
    const auto& item = items[static_cast<std::size_t>(k)];
    summaries[static_cast<std::size_t>(k)] = run_sweep_item(config, item.dim, item.index);
  }
  return assemble(config, items, std::move(summaries));
}

SweepResult run_sweep_serial(const ExperimentConfig& config) {
  config.validate();
  const std::vector<WorkItem> items = work_items(config);
  std::vector<TrajectorySummary> summaries;
  summaries.reserve(items.size());
  for (const auto& item : items) summaries.push_back(run_sweep_item(config, item.dim, item.index));
  return assemble(config, items, std::move(summaries));
}

AggregateSeries aggregate_trajectories(const std::vector<TrajectorySummary>& trajectories,
                                       int dim, bool include_excluded) {
  AggregateSeries a;
  a.dim = dim;
  a.includes_excluded = include_excluded;
  std::vector<const TrajectorySummary*> population;
  std::size_t longest = 0;
  for (const auto& s : trajectories) {
    if (s.final_status == Status::Defective) ++a.excluded_defective;
    if (s.final_status == Status::Cycling) ++a.excluded_cycling;
    if (!include_excluded && s.excluded()) continue;
    population.push_back(&s);
    longest = std::max(longest, s.records.size());
  }
  a.population = static_cast<int>(population.size());

  for (std::size_t k = 0; k < longest && a.population > 0; ++k) {
    double sum = 0.0;
    int valid = 0;
    for (const auto* s : population) {
      if (k < s->records.size() && s->records[k].log_neg_log_det) {
        sum += *s->records[k].log_neg_log_det;
        ++valid;
      }
    }
    if (2 * valid < a.population || valid == 0) break;
    a.mean_lnld.push_back(sum / valid);
    a.valid_count.push_back(valid);
  }
  if (a.mean_lnld.empty()) {
    throw Error(ErrorCode::InsufficientData,
                "no iteration of dim " + std::to_string(dim) + " has a valid majority");
  }
  return a;
}

AggregateSeries aggregate_lnld(const SweepResult& result, int dim, bool include_excluded) {
  const auto it = result.per_dim.find(dim);
  if (it == result.per_dim.end()) {
    throw Error(ErrorCode::InvalidConfig, "dimension " + std::to_string(dim) + " not in sweep");
  }
  return aggregate_trajectories(it->second, dim, include_excluded);
}

FitWindow default_fit_window(std::size_t series_length) {
  if (series_length == 0) return {0, -1};
  const double last = static_cast<double>(series_length - 1);
  return {static_cast<int>(std::floor(0.1 * last)), static_cast<int>(std::floor(0.8 * last))};
}

RateFit fit_rate(std::span<const double> series, FitWindow window) {
  if (window.first < 0 || window.last >= static_cast<int>(series.size()) ||
      window.last - window.first + 1 < 10) {
    throw Error(ErrorCode::InsufficientData,
                "fit window [" + std::to_string(window.first) + ", " +
                    std::to_string(window.last) + "] needs >= 10 points inside a series of " +
                    std::to_string(series.size()));
  }
  const int m = window.last - window.first + 1;
  double mean_k = 0.0;
  double mean_y = 0.0;
  for (int k = window.first; k <= window.last; ++k) {
    mean_k += k;
    mean_y += series[static_cast<std::size_t>(k)];
  }
  mean_k /= m;
  mean_y /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (int k = window.first; k <= window.last; ++k) {
    const double dk = k - mean_k;
    sxx += dk * dk;
    sxy += dk * (series[static_cast<std::size_t>(k)] - mean_y);
  }

  RateFit f;
  f.window = window;
  f.slope = sxy / sxx;
  f.intercept = mean_y - f.slope * mean_k;
  if (!(f.slope < 0.0)) {
    throw Error(ErrorCode::NonDecaying, "slope " + std::to_string(f.slope) + " is not negative");
  }
  f.fitted_t = std::log2(-1.0 / f.slope);
  double ss = 0.0;
  for (int k = window.first; k <= window.last; ++k) {
    const double e = series[static_cast<std::size_t>(k)] - (f.intercept + f.slope * k);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / m);
  return f;
}

std::optional<double> conjectured_rate_exponent(Variant variant, int dim) {
  switch (variant) {
    case Variant::Eigenbasis:
      if (dim >= 2 && dim <= 6) return dim - 2.0;
      break;
    case Variant::Product:
      if (dim >= 3 && dim <= 6) return dim - 3.0;
      break;
    case Variant::Similarity:
      break;
  }
  return std::nullopt;
}

RateTable fit_sweep(const SweepResult& result) {
  RateTable table;
  for (const auto& [dim, series] : result.aggregate) {
    try {
      RateFit f = fit_rate(series.mean_lnld, default_fit_window(series.mean_lnld.size()));
      f.dim = dim;
      f.conjectured_t = conjectured_rate_exponent(result.config.variant, dim);
      table.fits.push_back(f);
    } catch (const Error& e) {
      table.failures.emplace_back(dim, e.what());
    }
  }
  return table;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

double fraction_reaching(const std::vector<TrajectorySummary>& trajectories,
                         double det_threshold) {
  int total = 0;
  int hits = 0;
  for (const auto& s : trajectories) {
    if (s.excluded()) continue;
    ++total;
    if (s.final_det_gram() > det_threshold) ++hits;
  }
  return total == 0 ? std::nan("") : static_cast<double>(hits) / total;
}

double median_final_det(const std::vector<TrajectorySummary>& trajectories) {
  std::vector<double> v;
  for (const auto& s : trajectories) {
    if (!s.excluded()) v.push_back(s.final_det_gram());
  }
  return median(std::move(v));
}

double median_iterations_to_convergence(const std::vector<TrajectorySummary>& trajectories,
                                        int max_iters) {
  std::vector<double> v;
  for (const auto& s : trajectories) {
    if (s.excluded()) continue;
    v.push_back(s.final_status == Status::Converged ? s.records.back().iter : max_iters + 1.0);
  }
  return median(std::move(v));
}

}  // namespace eigenflow
