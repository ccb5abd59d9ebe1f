#include "eigenflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace eigenflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::ResidualExceeded: return "ResidualExceeded";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::UnsupportedDim: return "UnsupportedDim";
    case ErrorCode::QuadrantViolation: return "QuadrantViolation";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonDecaying: return "NonDecaying";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

void require_square_finite(const ComplexMatrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::InvalidConfig,
                std::string(what) + ": matrix must be square and non-empty");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidConfig, std::string(what) + ": non-finite entry");
  }
}

ComplexMatrix normalize_columns(const ComplexMatrix& m) {
  ComplexMatrix out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (!(norm > kColumnFloor)) {
      throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " has norm " +
                                             std::to_string(norm));
    }
    out.col(j) /= norm;
  }
  return out;
}

Eigen::Index phase_pivot(const ComplexVector& column) {
  constexpr double kTie = 1e-12;
  double largest = 0.0;
  for (Eigen::Index i = 0; i < column.size(); ++i) largest = std::max(largest, std::abs(column(i)));
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    if (std::abs(column(i)) >= largest - kTie) return i;
  }
  return 0;
}

void fix_phase(Eigen::Ref<ComplexVector> column, Eigen::Index pivot) {
  const Complex p = column(pivot);
  if (p.imag() == 0.0 && p.real() >= 0.0) return;
  const double mag = std::abs(p);
  if (mag == 0.0) return;
  column *= std::conj(p) / mag;
  column(pivot) = Complex(mag, 0.0);
}

namespace {

double canonical_arg(Complex z) {
  const double a = std::arg(z);
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

}  // namespace

bool canonical_eigenvalue_less(Complex a, Complex b) {
  const double ma = std::abs(a);
  const double mb = std::abs(b);
  if (ma != mb) return ma > mb;
  return canonical_arg(a) < canonical_arg(b);
}

double frobenius_residual(const ComplexMatrix& a, const ComplexMatrix& vectors,
                          const ComplexVector& values) {
  return (a * vectors - vectors * values.asDiagonal()).norm();
}

Eigendecomposition canonicalize(Eigendecomposition d) {
  const auto n = d.values.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    ComplexVector col = d.vectors.col(j);
    fix_phase(col, phase_pivot(col));
    d.vectors.col(j) = col;
  }

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int i, int j) {
    return canonical_eigenvalue_less(d.values(i), d.values(j));
  });
  if (std::is_sorted(perm.begin(), perm.end())) return d;

  Eigendecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.residual = d.residual;
  out.solver_order.resize(d.solver_order.size());
  std::vector<int> new_index(perm.size());
  for (std::size_t c = 0; c < perm.size(); ++c) {
    out.values(static_cast<Eigen::Index>(c)) = d.values(perm[c]);
    out.vectors.col(static_cast<Eigen::Index>(c)) = d.vectors.col(perm[c]);
    new_index[static_cast<std::size_t>(perm[c])] = static_cast<int>(c);
  }
  for (std::size_t j = 0; j < d.solver_order.size(); ++j) {
    out.solver_order[j] = new_index[static_cast<std::size_t>(d.solver_order[j])];
  }
  return out;
}

Eigendecomposition eigendecompose(const ComplexMatrix& a, double residual_tol) {
  if (!(residual_tol > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "residual_tol must be positive");
  }
  RawEigenpairs raw = solve_eigenpairs(a);

  Eigendecomposition d;
  d.values = std::move(raw.values);
  d.vectors = normalize_columns(raw.vectors);
  d.solver_order.resize(static_cast<std::size_t>(d.values.size()));
  std::iota(d.solver_order.begin(), d.solver_order.end(), 0);
  d = canonicalize(std::move(d));

  d.residual = frobenius_residual(a, d.vectors, d.values);
  const double bound = residual_tol * (1.0 + a.norm());
  if (!(d.residual <= bound)) {
    throw Error(ErrorCode::ResidualExceeded, "residual " + std::to_string(d.residual) +
                                                 " exceeds " + std::to_string(bound));
  }
  return d;
}

GramMetrics gram_metrics(const ComplexMatrix& x) {
  require_square_finite(x, "gram_metrics");
  const auto n = x.cols();
  const ComplexMatrix gram = x.adjoint() * x;

  GramMetrics g;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(gram(i, i) - 1.0) > 1e-8) {
      throw Error(ErrorCode::NotNormalized,
                  "column " + std::to_string(i) + " has squared norm " +
                      std::to_string(gram(i, i).real()));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) g.offdiag_max = std::max(g.offdiag_max, std::abs(gram(i, j)));
    }
  }
  g.frob_dev = (gram - ComplexMatrix::Identity(n, n)).norm();

  const Eigen::VectorXd sigma = singular_values(x);
  double det = 1.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) det *= sigma(i) * sigma(i);
  if (det > 1.0 + 1e-8) {
    throw Error(ErrorCode::NotNormalized,
                "Gram determinant " + std::to_string(det) + " exceeds the Hadamard bound");
  }
  g.det_gram = std::clamp(det, 0.0, 1.0);
  g.min_singular = sigma.size() > 0 ? sigma(sigma.size() - 1) : 0.0;
  return g;
}

std::string_view to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::Uniform01: return "uniform01";
    case EnsembleKind::Gaussian: return "gaussian";
    case EnsembleKind::ComplexGinibre: return "complex-ginibre";
    case EnsembleKind::HaarOrthogonal: return "haar-orthogonal";
    case EnsembleKind::HaarUnitary: return "haar-unitary";
    case EnsembleKind::UpperTriangularConstrained: return "upper-triangular-constrained";
  }
  return "unknown";
}

std::optional<EnsembleKind> parse_ensemble(std::string_view name) {
  for (auto kind : {EnsembleKind::Uniform01, EnsembleKind::Gaussian,
                    EnsembleKind::ComplexGinibre, EnsembleKind::HaarOrthogonal,
                    EnsembleKind::HaarUnitary, EnsembleKind::UpperTriangularConstrained}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

ComplexMatrix haar_matrix(int dim, bool complex_entries, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = complex_entries ? normal(rng) : 0.0;
      g(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexVector r_diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double mag = std::abs(r_diag(j));
    if (mag > 0.0) q.col(j) *= r_diag(j) / mag;
  }
  return q;
}

ComplexMatrix sample_matrix(const EnsembleSpec& spec) {
  if (spec.dim < 2) {
    throw Error(ErrorCode::UnsupportedDim, "dimension " + std::to_string(spec.dim) + " < 2");
  }
  const int n = spec.dim;
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  ComplexMatrix m = ComplexMatrix::Zero(n, n);

  switch (spec.kind) {
    case EnsembleKind::Uniform01:
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          double u = uniform(rng);
          if (u >= 1.0) u = std::nextafter(1.0, 0.0);
          m(i, j) = u;
        }
      }
      break;
    case EnsembleKind::Gaussian:
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = normal(rng);
      }
      break;
    case EnsembleKind::ComplexGinibre:
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double re = normal(rng);
          const double im = normal(rng);
          m(i, j) = Complex(re, im);
        }
      }
      break;
    case EnsembleKind::HaarOrthogonal:
      m = haar_matrix(n, false, rng);
      break;
    case EnsembleKind::HaarUnitary:
      m = haar_matrix(n, true, rng);
      break;
    case EnsembleKind::UpperTriangularConstrained: {
      Eigen::VectorXd last(n);
      do {
        for (Eigen::Index i = 0; i < n; ++i) last(i) = std::abs(normal(rng));
        last(n - 1) = -last(n - 1);
      } while (last(n - 1) == 0.0 || last.norm() < 1e-12);
      last.normalize();
      m.setIdentity();
      m.col(n - 1) = last.cast<Complex>();
      break;
    }
  }
  return m;
}

}  // namespace eigenflow
