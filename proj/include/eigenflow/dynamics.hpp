#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eigenflow/linalg.hpp"

namespace eigenflow {

enum class Variant { Eigenbasis, Similarity, Product };

enum class OrthoKind { RealOrthogonal, ComplexUnitary };

// Column order of the eigenvector matrix fed to the next iterate.
//   Solver:    Schur order as returned by the eigensolver backend.
//   Magnitude: canonical order (descending |lambda|, then ascending phase).
enum class EigenOrder { Solver, Magnitude };

// Per-column phase rule applied to the eigenvector matrix fed forward.
//   MaxEntry:  largest-magnitude entry real and nonnegative (canonical).
//   LastEntry: last non-negligible entry real and positive; this is the sign
//              choice under which [[1, s], [0, 1/2]] with s = +-sqrt(3)/2
//              map onto each other.
enum class PhaseConvention { MaxEntry, LastEntry };

struct Gauge {
  EigenOrder order = EigenOrder::Solver;
  PhaseConvention phase = PhaseConvention::MaxEntry;
};

std::string_view to_string(Variant v);
std::string_view to_string(OrthoKind k);
std::string_view to_string(EigenOrder o);
std::string_view to_string(PhaseConvention p);
std::optional<Variant> parse_variant(std::string_view s);
std::optional<OrthoKind> parse_ortho(std::string_view s);
std::optional<EigenOrder> parse_order(std::string_view s);
std::optional<PhaseConvention> parse_phase(std::string_view s);

struct TrajectoryConfig {
  int max_iters = 2000;
  double converge_tol = 1e-10;
  double defect_tol = 1e-12;
  int cycle_window = 8;
  double cycle_tol = 1e-9;
  double residual_tol = kDefaultResidualTol;
  OrthoKind ortho_kind = OrthoKind::RealOrthogonal;
  Gauge gauge{};

  void validate() const;
};

enum class Status { Running, Converged, Defective, Cycling, Exhausted };

std::string_view to_string(Status s);

struct TrajectoryRecord {
  int iter = 0;
  GramMetrics metrics;
  std::optional<double> log_neg_log_det;  // log(-log det_gram) when 0 < det_gram < 1
  Status status = Status::Running;
};

struct Trajectory {
  TrajectoryConfig config;
  Variant variant = Variant::Eigenbasis;
  ComplexMatrix initial;
  std::vector<TrajectoryRecord> records;
  Status final_status = Status::Exhausted;
  ComplexMatrix final_matrix;
  bool pre_normalized = false;   // iterate 0 was normalize_columns(initial)
  std::string diagnostic;        // set when a step error ended the run
  std::optional<int> cycle_partner;  // iterate matched when cycling
  double cycle_distance = 0.0;
};

std::optional<double> log_neg_log(double det_gram);

/// Eigenvector matrix of `a` in the requested gauge. Columns have unit norm.
ComplexMatrix gauge_eigenvectors(const ComplexMatrix& a, const Gauge& gauge,
                                 double residual_tol = kDefaultResidualTol);

struct StepResult {
  ComplexMatrix eigenvectors;  // Z: the normalized eigenvector matrix
  ComplexMatrix next;          // next iterate: Z, Q Z Q^H or Q Z
};

/// One application of the map. Similarity and product variants draw a fresh
/// Haar matrix from `q_source`; their output is not re-normalized, the next
/// eigendecomposition supplies the normalization.
StepResult step_detailed(const ComplexMatrix& a, Variant variant, Rng& q_source,
                         OrthoKind ortho_kind, const Gauge& gauge = {},
                         double residual_tol = kDefaultResidualTol);

ComplexMatrix step(const ComplexMatrix& a, Variant variant, Rng& q_source,
                   OrthoKind ortho_kind, const Gauge& gauge = {});

/// Representative modulo column phase and order: max-entry phase fixing,
/// then columns sorted lexicographically by their (re, im) entry sequence.
ComplexMatrix canonical_form(const ComplexMatrix& x);

/// Iterates `step` until converged, defective, cycling or out of budget.
/// Records metrics for every iterate including iterate 0. `seed` drives the
/// Haar stream for the randomized variants.
Trajectory run_trajectory(const ComplexMatrix& initial, Variant variant,
                          const TrajectoryConfig& config, std::uint64_t seed);

}  // namespace eigenflow
