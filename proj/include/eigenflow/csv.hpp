#pragma once

// Plain-text artifacts of runs and sweeps: trajectory and aggregate CSVs, the
// rate table and the JSON run manifest.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eigenflow/harness.hpp"

namespace eigenflow {

inline constexpr std::string_view kTrajectoryHeader =
    "experiment_id,variant,ensemble,dim,matrix_index,seed,iter,det_gram,log_neg_log_det,"
    "offdiag_max,frob_dev,min_singular,status";
inline constexpr std::string_view kAggregateHeader =
    "variant,ensemble,dim,iter,mean_lnld,valid_count,excluded_defective,excluded_cycling";
inline constexpr std::string_view kRatesHeader =
    "variant,ensemble,dim,slope,intercept,fitted_t,conjectured_t,window_first,window_last,"
    "residual";

/// Shortest text that parses back to the same double (%.17g); "nan", "inf"
/// and "-inf" for non-finite values.
std::string format_double(double v);
/// Strict inverse of format_double. Throws MalformedInput.
double parse_double(std::string_view s);

/// Fields shared by every row of one trajectory.
struct TrajectoryLabel {
  std::string experiment_id;
  Variant variant = Variant::Eigenbasis;
  std::string ensemble;  // ensemble name, or the name of a fixed input
  int dim = 0;
  int matrix_index = 0;
  std::uint64_t seed = 0;
};

void write_trajectory_header(std::ostream& out);
void write_trajectory_rows(std::ostream& out, const TrajectoryLabel& label,
                           const std::vector<TrajectoryRecord>& records);

void write_aggregate_csv(std::ostream& out, Variant variant, EnsembleKind ensemble,
                         const std::map<int, AggregateSeries>& series);

/// Aggregate CSV contents needed for fitting.
struct AggregateTable {
  Variant variant = Variant::Eigenbasis;
  EnsembleKind ensemble = EnsembleKind::Gaussian;
  std::map<int, std::vector<double>> mean_lnld;  // by dimension, iter 0..K
};

/// Throws MalformedInput on a wrong header, a bad cell, mixed variants or
/// ensembles, or iterations that are not 0, 1, 2, ... per dimension.
AggregateTable read_aggregate_csv(std::istream& in);

void write_rates_csv(std::ostream& out, Variant variant, EnsembleKind ensemble,
                     const RateTable& table);

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Throws MalformedInput on missing or ill-typed fields.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// 16 hex digits derived from the serialized config.
std::string experiment_id(const nlohmann::json& config_echo);

}  // namespace eigenflow
