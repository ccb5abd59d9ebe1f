#include "eigenflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "eigenflow/seed.hpp"

namespace eigenflow {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Eigenbasis: return "eigenbasis";
    case Variant::Similarity: return "similarity";
    case Variant::Product: return "product";
  }
  return "unknown";
}

std::string_view to_string(OrthoKind k) {
  return k == OrthoKind::RealOrthogonal ? "real-orthogonal" : "complex-unitary";
}

std::string_view to_string(EigenOrder o) {
  return o == EigenOrder::Solver ? "solver" : "magnitude";
}

std::string_view to_string(PhaseConvention p) {
  return p == PhaseConvention::MaxEntry ? "max-entry" : "last-entry";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Running: return "running";
    case Status::Converged: return "converged";
    case Status::Defective: return "defective";
    case Status::Cycling: return "cycling";
    case Status::Exhausted: return "exhausted";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view s) {
  for (auto v : {Variant::Eigenbasis, Variant::Similarity, Variant::Product}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<OrthoKind> parse_ortho(std::string_view s) {
  if (s == "real-orthogonal" || s == "orthogonal") return OrthoKind::RealOrthogonal;
  if (s == "complex-unitary" || s == "unitary") return OrthoKind::ComplexUnitary;
  return std::nullopt;
}

std::optional<EigenOrder> parse_order(std::string_view s) {
  if (s == "solver") return EigenOrder::Solver;
  if (s == "magnitude") return EigenOrder::Magnitude;
  return std::nullopt;
}

std::optional<PhaseConvention> parse_phase(std::string_view s) {
  if (s == "max-entry") return PhaseConvention::MaxEntry;
  if (s == "last-entry") return PhaseConvention::LastEntry;
  return std::nullopt;
}

void TrajectoryConfig::validate() const {
  if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be positive");
  if (!(converge_tol > 0.0) || !(defect_tol > 0.0) || !(cycle_tol > 0.0) ||
      !(residual_tol > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "tolerances must be positive");
  }
  if (cycle_window < 2) throw Error(ErrorCode::InvalidConfig, "cycle_window must be >= 2");
}

std::optional<double> log_neg_log(double det_gram) {
  if (det_gram > 0.0 && det_gram < 1.0) return std::log(-std::log(det_gram));
  return std::nullopt;
}

namespace {

constexpr double kNegligibleEntry = 1e-10;

void fix_last_entry_phase(Eigen::Ref<ComplexVector> column) {
  for (Eigen::Index i = column.size() - 1; i >= 0; --i) {
    if (std::abs(column(i)) > kNegligibleEntry) {
      fix_phase(column, i);
      return;
    }
  }
}

bool has_unit_columns(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (std::abs(m.col(j).norm() - 1.0) > 1e-10) return false;
  }
  return true;
}

}  // namespace

ComplexMatrix gauge_eigenvectors(const ComplexMatrix& a, const Gauge& gauge,
                                 double residual_tol) {
  const Eigendecomposition d = eigendecompose(a, residual_tol);
  ComplexMatrix z(d.vectors.rows(), d.vectors.cols());
  if (gauge.order == EigenOrder::Solver) {
    for (std::size_t j = 0; j < d.solver_order.size(); ++j) {
      z.col(static_cast<Eigen::Index>(j)) = d.vectors.col(d.solver_order[j]);
    }
  } else {
    z = d.vectors;
  }
  if (gauge.phase == PhaseConvention::LastEntry) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      ComplexVector col = z.col(j);
      fix_last_entry_phase(col);
      z.col(j) = col;
    }
  }
  return z;
}

StepResult step_detailed(const ComplexMatrix& a, Variant variant, Rng& q_source,
                         OrthoKind ortho_kind, const Gauge& gauge, double residual_tol) {
  require_square_finite(a, "step");
  StepResult r;
  r.eigenvectors = gauge_eigenvectors(a, gauge, residual_tol);
  switch (variant) {
    case Variant::Eigenbasis:
      r.next = r.eigenvectors;
      break;
    case Variant::Similarity: {
      const ComplexMatrix q = haar_matrix(static_cast<int>(a.rows()),
                                          ortho_kind == OrthoKind::ComplexUnitary, q_source);
      r.next = q * r.eigenvectors * q.adjoint();
      break;
    }
    case Variant::Product: {
      const ComplexMatrix q = haar_matrix(static_cast<int>(a.rows()),
                                          ortho_kind == OrthoKind::ComplexUnitary, q_source);
      r.next = q * r.eigenvectors;
      break;
    }
  }
  return r;
}

ComplexMatrix step(const ComplexMatrix& a, Variant variant, Rng& q_source,
                   OrthoKind ortho_kind, const Gauge& gauge) {
  return step_detailed(a, variant, q_source, ortho_kind, gauge).next;
}

ComplexMatrix canonical_form(const ComplexMatrix& x) {
  ComplexMatrix phased = x;
  for (Eigen::Index j = 0; j < phased.cols(); ++j) {
    ComplexVector col = phased.col(j);
    fix_phase(col, phase_pivot(col));
    phased.col(j) = col;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(phased.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  // Descending lexicographic order on (re, im) of successive entries, so a
  // column-permuted identity maps back to the identity.
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index i = 0; i < phased.rows(); ++i) {
      const Complex u = phased(i, a);
      const Complex v = phased(i, b);
      if (u.real() != v.real()) return u.real() > v.real();
      if (u.imag() != v.imag()) return u.imag() > v.imag();
    }
    return false;
  });

  ComplexMatrix out(phased.rows(), phased.cols());
  for (std::size_t c = 0; c < order.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = phased.col(order[c]);
  }
  return out;
}

Trajectory run_trajectory(const ComplexMatrix& initial, Variant variant,
                          const TrajectoryConfig& config, std::uint64_t seed) {
  config.validate();
  require_square_finite(initial, "run_trajectory");
  if (initial.rows() < 2) {
    throw Error(ErrorCode::UnsupportedDim, "trajectory needs dim >= 2");
  }

  Trajectory t;
  t.config = config;
  t.variant = variant;
  t.initial = initial;

  Rng q_source(derive_seed(seed, kHaarStreamTag));
  ComplexMatrix state = initial;
  ComplexMatrix basis;
  if (has_unit_columns(initial)) {
    basis = initial;
  } else {
    t.pre_normalized = true;
    try {
      basis = normalize_columns(initial);
    } catch (const Error& e) {
      TrajectoryRecord rec;
      rec.status = Status::Defective;
      t.records.push_back(rec);
      t.final_status = Status::Defective;
      t.final_matrix = initial;
      t.diagnostic = e.what();
      return t;
    }
  }

  std::deque<std::pair<int, ComplexMatrix>> window;
  for (int k = 0;; ++k) {
    TrajectoryRecord rec;
    rec.iter = k;
    rec.metrics = gram_metrics(basis);
    rec.log_neg_log_det = log_neg_log(rec.metrics.det_gram);

    if (rec.metrics.frob_dev < config.converge_tol) {
      rec.status = Status::Converged;
    } else if (rec.metrics.min_singular < config.defect_tol) {
      rec.status = Status::Defective;
    } else {
      ComplexMatrix canon = canonical_form(basis);
      for (const auto& [iter, previous] : window) {
        const double dist = (canon - previous).norm();
        if (dist < config.cycle_tol) {
          rec.status = Status::Cycling;
          t.cycle_partner = iter;
          t.cycle_distance = dist;
          break;
        }
      }
      if (rec.status == Status::Running) {
        if (k >= config.max_iters) {
          rec.status = Status::Exhausted;
        } else {
          window.emplace_back(k, std::move(canon));
          if (static_cast<int>(window.size()) > config.cycle_window) window.pop_front();
        }
      }
    }

    t.records.push_back(rec);
    if (rec.status != Status::Running) break;

    try {
      StepResult r = step_detailed(state, variant, q_source, config.ortho_kind, config.gauge,
                                   config.residual_tol);
      basis = std::move(r.eigenvectors);
      state = std::move(r.next);
    } catch (const Error& e) {
      t.records.back().status = Status::Defective;
      t.diagnostic = e.what();
      break;
    }
  }

  t.final_status = t.records.back().status;
  t.final_matrix = state;
  return t;
}

}  // namespace eigenflow
