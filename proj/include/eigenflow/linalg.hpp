#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eigenflow/error.hpp"

namespace eigenflow {

using Complex = std::complex<double>;

// Dense column-major n x n complex matrix. Squareness and finiteness are
// checked at API boundaries with require_square_finite().
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

using Rng = std::mt19937_64;

inline constexpr double kColumnFloor = 1e-300;
inline constexpr double kDefaultResidualTol = 1e-8;

void require_square_finite(const ComplexMatrix& m, std::string_view what);

/// Divides every column by its L2 norm. Throws ZeroColumn when a column
/// norm is at or below kColumnFloor.
ComplexMatrix normalize_columns(const ComplexMatrix& m);

/// Spectral decomposition in canonical gauge.
///
/// Columns of `vectors` have unit L2 norm, the largest-magnitude entry of each
/// column (lowest index on near ties) is real and nonnegative, and columns are
/// ordered by descending |lambda| with ties broken by ascending arg(lambda) in
/// (-pi, pi]. `solver_order[j]` is the canonical index of the backend's j-th
/// eigenpair, so the raw Schur ordering can be recovered.
struct Eigendecomposition {
  ComplexVector values;
  ComplexMatrix vectors;
  double residual = 0.0;
  std::vector<int> solver_order;
};

/// Raw backend output: eigenvalues and (unnormalized) eigenvectors in the
/// order produced by the Schur reduction.
struct RawEigenpairs {
  ComplexVector values;
  ComplexMatrix vectors;
};

/// LAPACK zgeev. Throws NumericalFailure when the QR iteration does not converge.
RawEigenpairs solve_eigenpairs(const ComplexMatrix& a);

/// Singular values in descending order (LAPACK zgesvd).
Eigen::VectorXd singular_values(const ComplexMatrix& x);

Eigendecomposition eigendecompose(const ComplexMatrix& a,
                                  double residual_tol = kDefaultResidualTol);

/// Re-applies the phase and ordering rules. Exact identity on canonical input.
Eigendecomposition canonicalize(Eigendecomposition d);

/// Index of the entry fixed real-nonnegative by the canonical phase rule.
Eigen::Index phase_pivot(const ComplexVector& column);

/// Rotates `column` so entry `pivot` becomes real and nonnegative.
void fix_phase(Eigen::Ref<ComplexVector> column, Eigen::Index pivot);

/// True when (|a|, arg a) sorts before (|b|, arg b) in canonical order.
bool canonical_eigenvalue_less(Complex a, Complex b);

double frobenius_residual(const ComplexMatrix& a, const ComplexMatrix& vectors,
                          const ComplexVector& values);

struct GramMetrics {
  double det_gram = 0.0;      // det(X^H X), clamped to [0, 1]
  double offdiag_max = 0.0;   // max |(X^H X)_ij|, i != j
  double frob_dev = 0.0;      // ||X^H X - I||_F
  double min_singular = 0.0;  // smallest singular value of X
};

/// Unitarity certificates of a unit-column matrix. det_gram is the product
/// of squared singular values. Throws NotNormalized if any Gram diagonal
/// entry deviates from 1 by more than 1e-8.
GramMetrics gram_metrics(const ComplexMatrix& x);

enum class EnsembleKind {
  Uniform01,
  Gaussian,
  ComplexGinibre,
  HaarOrthogonal,
  HaarUnitary,
  UpperTriangularConstrained,
};

std::string_view to_string(EnsembleKind kind);
std::optional<EnsembleKind> parse_ensemble(std::string_view name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Gaussian;
  int dim = 2;
  std::uint64_t seed = 0;
};

/// Deterministic draw: the same spec reproduces the same matrix bit for bit
/// within one build.
///
/// The upper-triangular-constrained kind is the identity with its last
/// column replaced by a unit vector whose leading entries are nonnegative
/// and whose last entry is negative. For dim = 2 this is
/// [[1, cos t], [0, sin t]] with t uniform in (-pi/2, 0).
ComplexMatrix sample_matrix(const EnsembleSpec& spec);

/// Haar-distributed orthogonal (real) or unitary (complex) matrix drawn from
/// `rng`: QR of a Gaussian matrix with the sign/phase of diag(R) moved into Q.
ComplexMatrix haar_matrix(int dim, bool complex_entries, Rng& rng);

}  // namespace eigenflow
