#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eigenflow/dynamics.hpp"
#include "eigenflow/linalg.hpp"

namespace eigenflow {

struct ExperimentConfig {
  Variant variant = Variant::Eigenbasis;
  EnsembleKind ensemble = EnsembleKind::Gaussian;
  std::vector<int> dims{2, 3, 4, 5, 6};
  int matrices_per_dim = 100;
  int max_iters = 2000;  // overrides trajectory.max_iters
  std::uint64_t base_seed = 0;
  TrajectoryConfig trajectory{};
  int workers = 0;  // 0: OpenMP default; EIGENFLOW_WORKERS overrides either
  int dim_cap = 16;

  void validate() const;
  TrajectoryConfig resolved_trajectory() const;
};

/// Worker count for a sweep: EIGENFLOW_WORKERS if set and positive, else
/// `requested` if positive, else the OpenMP default.
int resolve_workers(int requested);

struct TrajectorySummary {
  int index = 0;
  std::uint64_t seed = 0;
  Status final_status = Status::Exhausted;
  std::vector<TrajectoryRecord> records;
  std::string diagnostic;

  double final_det_gram() const { return records.back().metrics.det_gram; }
  bool excluded() const {
    return final_status == Status::Defective || final_status == Status::Cycling;
  }
};

struct StatusCounts {
  int converged = 0;
  int defective = 0;
  int cycling = 0;
  int exhausted = 0;

  int total() const { return converged + defective + cycling + exhausted; }
};

/// Per-iteration mean of log(-log det_gram). Defined at iteration k only
/// while at least half of the population has a finite value there; the
/// series stops at the first iteration that fails this.
struct AggregateSeries {
  int dim = 0;
  std::vector<double> mean_lnld;
  std::vector<int> valid_count;
  int population = 0;
  int excluded_defective = 0;
  int excluded_cycling = 0;
  bool includes_excluded = false;
};

struct SweepResult {
  ExperimentConfig config;
  std::map<int, std::vector<TrajectorySummary>> per_dim;
  std::map<int, StatusCounts> counts;
  std::map<int, AggregateSeries> aggregate;      // defective and cycling excluded
  std::map<int, AggregateSeries> aggregate_all;  // every trajectory
};

/// Trajectory `index` of dimension `dim`; the unit of parallel work.
TrajectorySummary run_sweep_item(const ExperimentConfig& config, int dim, int index);

/// OpenMP-parallel sweep. Results do not depend on the worker count or on
/// completion order.
SweepResult run_sweep(const ExperimentConfig& config);

/// Single-threaded reference implementation of run_sweep.
SweepResult run_sweep_serial(const ExperimentConfig& config);

/// Throws InsufficientData when no iteration satisfies the validity rule and
/// InvalidConfig when `dim` is not part of the sweep.
AggregateSeries aggregate_lnld(const SweepResult& result, int dim,
                               bool include_excluded = false);

AggregateSeries aggregate_trajectories(const std::vector<TrajectorySummary>& trajectories,
                                       int dim, bool include_excluded);

struct FitWindow {
  int first = 0;  // inclusive
  int last = 0;   // inclusive
};

struct RateFit {
  int dim = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double fitted_t = 0.0;  // log2(-1 / slope)
  std::optional<double> conjectured_t;
  FitWindow window{};
  double residual = 0.0;  // RMS of the least-squares residuals
};

/// [floor(0.1 K), floor(0.8 K)] with K the last index of the series.
FitWindow default_fit_window(std::size_t series_length);

/// Ordinary least squares of series[k] against k over `window`. Needs at
/// least 10 points; throws NonDecaying when the slope is not negative.
RateFit fit_rate(std::span<const double> series, FitWindow window);

/// Exponent t of the rate law det ~ exp(-exp(-k / 2^t)): n - 2 for the
/// eigenbasis map (n in 2..6) and n - 3 for the product variant (n in 3..6).
/// No law is stated for the similarity variant or other dimensions.
std::optional<double> conjectured_rate_exponent(Variant variant, int dim);

struct RateTable {
  std::vector<RateFit> fits;
  std::vector<std::pair<int, std::string>> failures;
};

RateTable fit_sweep(const SweepResult& result);

// Summary statistics over the non-excluded trajectories of one dimension.
double fraction_reaching(const std::vector<TrajectorySummary>& trajectories,
                         double det_threshold);
double median_final_det(const std::vector<TrajectorySummary>& trajectories);
/// First iterate with status converged; non-converged runs count as
/// max_iters + 1.
double median_iterations_to_convergence(const std::vector<TrajectorySummary>& trajectories,
                                        int max_iters);

}  // namespace eigenflow
