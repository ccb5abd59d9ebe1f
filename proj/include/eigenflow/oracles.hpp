#pragma once

// Closed-form special cases of the eigen-extrusion map, and constrained
// numerical iterations that are checked against them.
//
// Each constrained step runs the general eigensolver and then picks the
// sign/phase (and column order) of the eigenvectors that keeps the iterate
// inside its family:
//
//   T1Family          [[1, cos t], [0, sin t]],  t in [-pi/2, 0]
//   LastColumnFamily  identity with last column x, |x| = 1,
//                     x_i >= 0 for i < n, x_n < 0
//   T3Family          [[1, 0, a], [0, -1, b], [0, 0, i c]],
//                     |a|^2 + |b|^2 + c^2 = 1, c real
//   Special2x2Family  [[cos t1, cos t2], [sin t1, sin t2]],
//                     t1 in the first quadrant, t2 in the fourth

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eigenflow/linalg.hpp"

namespace eigenflow {

struct T1Family {
  double theta = 0.0;
};

struct LastColumnFamily {
  Eigen::VectorXd x;
};

struct T3Family {
  Complex a{};
  Complex b{};
  double c = 0.0;
};

struct Special2x2Family {
  double theta1 = 0.0;
  double theta2 = 0.0;
};

using TriangularFamily = std::variant<T1Family, LastColumnFamily, T3Family, Special2x2Family>;

/// Throws ConstraintViolation when `f` is outside its family.
void validate_family(const TriangularFamily& f);
ComplexMatrix family_matrix(const TriangularFamily& f);
ComplexMatrix family_limit(const TriangularFamily& f);

struct ConstrainedStep {
  TriangularFamily next;
  ComplexMatrix eigenvectors;  // constrained eigenvector matrix == family_matrix(next)
};

/// Eigenvector matrix of the family member, with the family's sign/phase
/// choice applied to the general eigensolver output.
ConstrainedStep constrained_step_detailed(const TriangularFamily& f);
TriangularFamily constrained_extrusion_step(const TriangularFamily& f);

// ---- closed forms -------------------------------------------------------

/// theta -> -pi/4 + theta/2 on [-pi/2, 0]; throws QuadrantViolation outside.
double t1_angle_step(double theta);
ComplexMatrix t1_limit();

/// Angles (t_1, ..., t_{n-1}) with
/// x = (c1 c2 ... c_{n-1}, s1 c2 ... c_{n-1}, s2 c3 ... c_{n-1}, ..., s_{n-1}).
std::vector<double> last_column_angles(const Eigen::VectorXd& x);
Eigen::VectorXd last_column_from_angles(const std::vector<double>& angles);

/// Direction of the leading n-1 entries is kept, the final angle follows the
/// T1 recursion.
LastColumnFamily last_column_analytic_step(const LastColumnFamily& f);

/// tan^2 of the angle between (a, b) and i c: c^2 / (|a|^2 + |b|^2).
double t3_tan2(const T3Family& f);
/// t -> 1 + 2 t
double t3_tan2_step(double tan2);

struct Special2x2Bounds {
  double tan_theta3_upper = 0.0;      // tan t3 <= this
  double tan_abs_theta4_lower = 0.0;  // tan |t4| >= this
  double expansion_ratio = 0.0;       // delta / cos t1, delta = -sin t2 - sin t1
  bool expansion_valid = false;       // expansion_ratio < 1
  // Lower bound on tan t1 - tan t3 from the second-order expansion; only
  // meaningful when expansion_valid.
  double tan_gap_lower = 0.0;
};

/// Gerschgorin-derived bounds on the successor angles. Requires
/// t1 in (0, pi/4), t2 in (-pi/2, -pi/4) and t1 - pi/2 != t2 (the orthogonal
/// case); throws DomainViolation otherwise.
Special2x2Bounds special2x2_bounds(double theta1, double theta2);

/// ([[1, sqrt3/2], [0, 1/2]], [[1, -sqrt3/2], [0, 1/2]]), each an
/// eigenvector matrix of the other.
std::pair<ComplexMatrix, ComplexMatrix> loop_pair();

/// [[1, eps], [0, sqrt(1 - eps^2)]] and its decomposition. eps in (0, 0.1).
std::pair<ComplexMatrix, Eigendecomposition> discontinuity_pair(double eps);

// ---- verification reports ----------------------------------------------

struct OracleReport {
  std::string name;
  int steps_checked = 0;
  double max_angle_error = 0.0;  // or the oracle's primary per-step error
  double limit_error = 0.0;
  bool passed = false;
  std::vector<std::string> notes;
  std::optional<std::string> failure;  // first failing assertion
};

/// Constrained numerical T1 iteration against t1_angle_step.
OracleReport verify_t1(int steps = 50, double theta0 = -0.3);

/// Constrained iteration of the last-column family. Checks direction
/// preservation of the leading entries, the final-angle recursion and the
/// limit diag(1, ..., 1, -1).
OracleReport verify_last_column(int dim, int steps = 60, std::uint64_t seed = 1);

/// tan^2 recursion from t = 0 against 2^{k+1} - 1 (k = 0 is the first
/// successor), numerically and in closed form, plus |x|/|y| = |a|/|b|, the
/// phase-sum identity and the limit diag(1, -1, i).
OracleReport verify_t3(int steps = 60, std::uint64_t seed = 1);

/// Random valid starts: Gerschgorin bounds hold for the true successor
/// angles, theta1 strictly decreases, |theta2| strictly increases, and the
/// iteration reaches diag(1, -1).
OracleReport verify_special2x2(int cases = 100, std::uint64_t seed = 1);

/// The 2-cycle: eigenpair residual, det_gram = 1/4 and cycle detection under
/// the last-entry sign convention.
OracleReport verify_loop();

/// Near-identity input whose eigenvector matrix stays far from unitary.
OracleReport verify_discontinuity(double eps = 1e-6);

/// Two-stage constrained iteration of a real 3x3 upper-triangular matrix:
/// T1 rule on the second column first, then the T3 rule on the third.
OracleReport verify_corollary(int stage1_steps = 40, int stage2_steps = 80,
                              std::uint64_t seed = 1);

}  // namespace eigenflow
