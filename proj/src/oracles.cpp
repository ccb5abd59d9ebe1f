#include "eigenflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "eigenflow/dynamics.hpp"

namespace eigenflow {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kStructureTol = 1e-10;
const Complex kI{0.0, 1.0};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void violate(const std::string& what) {
  throw Error(ErrorCode::ConstraintViolation, what);
}

// Column of `d` whose eigenvalue is nearest to `target`.
ComplexVector eigenvector_near(const Eigendecomposition& d, Complex target) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < d.values.size(); ++j) {
    if (std::abs(d.values(j) - target) < std::abs(d.values(best) - target)) best = j;
  }
  return d.vectors.col(best);
}

// Rotates `v` so that v(i) has phase `target_phase` (unit complex).
void set_phase(ComplexVector& v, Eigen::Index i, Complex target_phase) {
  const double mag = std::abs(v(i));
  if (mag == 0.0) violate("pivot entry " + std::to_string(i) + " vanishes");
  v *= target_phase * std::conj(v(i)) / mag;
  v(i) = target_phase * mag;
}

double imag_max(const ComplexVector& v) { return v.imag().cwiseAbs().maxCoeff(); }

ComplexMatrix diag_limit(std::initializer_list<Complex> entries) {
  const auto n = static_cast<Eigen::Index>(entries.size());
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  Eigen::Index i = 0;
  for (Complex e : entries) m(i, i) = e, ++i;
  return m;
}

ConstrainedStep t1_step(const T1Family& f) {
  const ComplexMatrix a = family_matrix(f);
  const Eigendecomposition d = eigendecompose(a);
  ComplexVector v = eigenvector_near(d, std::sin(f.theta));
  // fourth quadrant: second entry real negative, first entry nonnegative
  set_phase(v, 1, Complex(-1.0, 0.0));
  if (imag_max(v) > kStructureTol || v(0).real() < -kStructureTol) {
    violate("T1 eigenvector left the fourth quadrant");
  }
  T1Family next{std::atan2(v(1).real(), std::max(0.0, v(0).real()))};
  return {next, family_matrix(next)};
}

ConstrainedStep last_column_step(const LastColumnFamily& f) {
  const auto n = f.x.size();
  const ComplexMatrix a = family_matrix(f);
  const Eigendecomposition d = eigendecompose(a);
  const double xn = f.x(n - 1);

  // Every other eigenvector spans the coordinate subspace of e_1..e_{n-1};
  // that eigenspace is taken in the standard basis.
  Eigen::Index last = 0;
  for (Eigen::Index j = 1; j < n; ++j) {
    if (std::abs(d.values(j) - xn) < std::abs(d.values(last) - xn)) last = j;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != last && std::abs(d.vectors(n - 1, j)) > kStructureTol) {
      violate("unit eigenspace is not spanned by e_1..e_{n-1}");
    }
  }
  ComplexVector y = d.vectors.col(last);
  set_phase(y, n - 1, Complex(-1.0, 0.0));
  if (imag_max(y) > kStructureTol) violate("last-column eigenvector is not real");
  LastColumnFamily next{y.real()};
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (next.x(i) < -kStructureTol) violate("last-column eigenvector has a negative entry");
    next.x(i) = std::max(0.0, next.x(i));
  }
  next.x.normalize();
  return {next, family_matrix(next)};
}

ConstrainedStep t3_step(const T3Family& f) {
  const ComplexMatrix a = family_matrix(f);
  const Eigendecomposition d = eigendecompose(a);
  ComplexVector v = eigenvector_near(d, kI * f.c);
  set_phase(v, 2, kI);  // third entry i z with z > 0

  const ComplexVector e1 = eigenvector_near(d, 1.0);
  const ComplexVector e2 = eigenvector_near(d, -1.0);
  if (std::abs(e1(1)) > kStructureTol || std::abs(e1(2)) > kStructureTol ||
      std::abs(e2(2)) > kStructureTol) {
    violate("T3 eigenvectors lost the triangular structure");
  }
  T3Family next{v(0), v(1), v(2).imag()};
  return {next, family_matrix(next)};
}

ConstrainedStep special2x2_step(const Special2x2Family& f) {
  const ComplexMatrix a = family_matrix(f);
  const Eigendecomposition d = eigendecompose(a);
  Eigen::Index pos = d.values(0).real() > d.values(1).real() ? 0 : 1;
  ComplexVector u = d.vectors.col(pos);
  ComplexVector w = d.vectors.col(1 - pos);
  set_phase(u, 0, Complex(1.0, 0.0));
  set_phase(w, 0, Complex(1.0, 0.0));
  if (imag_max(u) > kStructureTol || imag_max(w) > kStructureTol) {
    violate("special 2x2 eigenvectors are not real");
  }
  if (u(1).real() < 0.0 || w(1).real() >= 0.0) {
    violate("special 2x2 eigenvectors left their quadrants");
  }
  Special2x2Family next{std::atan2(u(1).real(), u(0).real()),
                        std::atan2(w(1).real(), w(0).real())};
  return {next, family_matrix(next)};
}

}  // namespace

void validate_family(const TriangularFamily& f) {
  std::visit(
      Overloaded{
          [](const T1Family& t) {
            if (!(t.theta >= -kHalfPi && t.theta <= 0.0)) violate("T1 angle outside [-pi/2, 0]");
          },
          [](const LastColumnFamily& l) {
            const auto n = l.x.size();
            if (n < 2) violate("last-column family needs n >= 2");
            if (std::abs(l.x.norm() - 1.0) > 1e-12) violate("last column is not unit norm");
            for (Eigen::Index i = 0; i + 1 < n; ++i) {
              if (l.x(i) < 0.0) violate("leading last-column entries must be >= 0");
            }
            if (!(l.x(n - 1) < 0.0)) violate("final last-column entry must be < 0");
          },
          [](const T3Family& t) {
            const double norm2 = std::norm(t.a) + std::norm(t.b) + t.c * t.c;
            if (std::abs(norm2 - 1.0) > 1e-12) violate("|a|^2 + |b|^2 + c^2 != 1");
          },
          [](const Special2x2Family& s) {
            if (!(s.theta1 >= 0.0 && s.theta1 < kHalfPi)) violate("theta1 outside first quadrant");
            if (!(s.theta2 >= -kHalfPi && s.theta2 < 0.0)) violate("theta2 outside fourth quadrant");
          },
      },
      f);
}

ComplexMatrix family_matrix(const TriangularFamily& f) {
  return std::visit(
      Overloaded{
          [](const T1Family& t) -> ComplexMatrix {
            ComplexMatrix m(2, 2);
            m << 1.0, std::cos(t.theta), 0.0, std::sin(t.theta);
            return m;
          },
          [](const LastColumnFamily& l) -> ComplexMatrix {
            const auto n = l.x.size();
            ComplexMatrix m = ComplexMatrix::Identity(n, n);
            m.col(n - 1) = l.x.cast<Complex>();
            return m;
          },
          [](const T3Family& t) -> ComplexMatrix {
            ComplexMatrix m = ComplexMatrix::Zero(3, 3);
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            m(0, 2) = t.a;
            m(1, 2) = t.b;
            m(2, 2) = kI * t.c;
            return m;
          },
          [](const Special2x2Family& s) -> ComplexMatrix {
            ComplexMatrix m(2, 2);
            m << std::cos(s.theta1), std::cos(s.theta2), std::sin(s.theta1), std::sin(s.theta2);
            return m;
          },
      },
      f);
}

ComplexMatrix family_limit(const TriangularFamily& f) {
  return std::visit(
      Overloaded{
          [](const T1Family&) { return t1_limit(); },
          [](const LastColumnFamily& l) -> ComplexMatrix {
            const auto n = l.x.size();
            ComplexMatrix m = ComplexMatrix::Identity(n, n);
            m(n - 1, n - 1) = -1.0;
            return m;
          },
          [](const T3Family&) { return diag_limit({1.0, -1.0, kI}); },
          [](const Special2x2Family&) { return diag_limit({1.0, -1.0}); },
      },
      f);
}

ConstrainedStep constrained_step_detailed(const TriangularFamily& f) {
  validate_family(f);
  return std::visit(
      Overloaded{
          [](const T1Family& t) { return t1_step(t); },
          [](const LastColumnFamily& l) { return last_column_step(l); },
          [](const T3Family& t) { return t3_step(t); },
          [](const Special2x2Family& s) { return special2x2_step(s); },
      },
      f);
}

TriangularFamily constrained_extrusion_step(const TriangularFamily& f) {
  return constrained_step_detailed(f).next;
}

double t1_angle_step(double theta) {
  if (!(theta >= -kHalfPi && theta <= 0.0)) {
    throw Error(ErrorCode::QuadrantViolation,
                "angle " + std::to_string(theta) + " outside [-pi/2, 0]");
  }
  return -kPi / 4.0 + theta / 2.0;
}

ComplexMatrix t1_limit() { return diag_limit({1.0, -1.0}); }

std::vector<double> last_column_angles(const Eigen::VectorXd& x) {
  const auto n = x.size();
  std::vector<double> angles(static_cast<std::size_t>(n - 1));
  for (Eigen::Index j = n - 1; j >= 1; --j) {
    angles[static_cast<std::size_t>(j - 1)] = std::atan2(x(j), x.head(j).norm());
  }
  return angles;
}

Eigen::VectorXd last_column_from_angles(const std::vector<double>& angles) {
  const auto n = static_cast<Eigen::Index>(angles.size()) + 1;
  Eigen::VectorXd x(n);
  double tail = 1.0;  // product of cosines of the later angles
  for (Eigen::Index j = n - 1; j >= 1; --j) {
    const double t = angles[static_cast<std::size_t>(j - 1)];
    x(j) = std::sin(t) * tail;
    tail *= std::cos(t);
  }
  x(0) = tail;
  return x;
}

LastColumnFamily last_column_analytic_step(const LastColumnFamily& f) {
  const auto n = f.x.size();
  const double final_angle = std::atan2(f.x(n - 1), f.x.head(n - 1).norm());
  const double next_angle = t1_angle_step(final_angle);
  LastColumnFamily next{Eigen::VectorXd(n)};
  const double lead = f.x.head(n - 1).norm();
  if (lead > 0.0) {
    next.x.head(n - 1) = f.x.head(n - 1) / lead * std::cos(next_angle);
  } else {
    next.x.head(n - 1).setZero();
  }
  next.x(n - 1) = std::sin(next_angle);
  return next;
}

double t3_tan2(const T3Family& f) {
  return f.c * f.c / (std::norm(f.a) + std::norm(f.b));
}

double t3_tan2_step(double tan2) { return 1.0 + 2.0 * tan2; }

Special2x2Bounds special2x2_bounds(double theta1, double theta2) {
  if (!(theta1 > 0.0 && theta1 < kPi / 4.0)) {
    throw Error(ErrorCode::DomainViolation, "theta1 must lie in (0, pi/4)");
  }
  if (!(theta2 > -kHalfPi && theta2 < -kPi / 4.0)) {
    throw Error(ErrorCode::DomainViolation, "theta2 must lie in (-pi/2, -pi/4)");
  }
  if (std::abs(theta1 - kHalfPi - theta2) < 1e-12) {
    throw Error(ErrorCode::DomainViolation, "theta1 - pi/2 == theta2: the matrix is orthogonal");
  }
  const double s1 = std::sin(theta1);
  const double c1 = std::cos(theta1);
  const double s2 = std::sin(theta2);
  const double c2 = std::cos(theta2);

  Special2x2Bounds b;
  b.tan_theta3_upper = s1 / (c1 - s1 - s2);
  b.tan_abs_theta4_lower = (-s2 - c2 + c1) / c2;
  const double delta = -s2 - s1;
  b.expansion_ratio = delta / c1;
  b.expansion_valid = b.expansion_ratio < 1.0;
  if (b.expansion_valid) {
    b.tan_gap_lower = std::tan(theta1) * (b.expansion_ratio - b.expansion_ratio * b.expansion_ratio);
  }
  return b;
}

std::pair<ComplexMatrix, ComplexMatrix> loop_pair() {
  const double s = std::sqrt(3.0) / 2.0;
  ComplexMatrix a(2, 2);
  ComplexMatrix b(2, 2);
  a << 1.0, s, 0.0, 0.5;
  b << 1.0, -s, 0.0, 0.5;
  return {a, b};
}

std::pair<ComplexMatrix, Eigendecomposition> discontinuity_pair(double eps) {
  if (!(eps > 0.0 && eps < 0.1)) {
    throw Error(ErrorCode::DomainViolation, "eps must lie in (0, 0.1)");
  }
  ComplexMatrix a(2, 2);
  a << 1.0, eps, 0.0, std::sqrt(1.0 - eps * eps);
  return {a, eigendecompose(a)};
}

// ---- verification -------------------------------------------------------

namespace {

class Checker {
 public:
  explicit Checker(OracleReport& r) : r_(r) {}

  // Records the first failing assertion; later ones are ignored.
  bool require(bool ok, const std::string& what) {
    if (!ok && !r_.failure) r_.failure = what;
    return ok;
  }

  void finish() { r_.passed = !r_.failure.has_value(); }

 private:
  OracleReport& r_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

template <class Fn>
void guarded(OracleReport& r, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (!r.failure) r.failure = e.what();
  }
  r.passed = !r.failure.has_value();
}

}  // namespace

OracleReport verify_t1(int steps, double theta0) {
  OracleReport r;
  r.name = "t1";
  guarded(r, [&] {
    Checker check(r);
    check.require(theta0 > -kHalfPi && theta0 < 0.0, "initial angle outside (-pi/2, 0)");
    T1Family state{theta0};
    ComplexMatrix x = family_matrix(state);
    const double gap0 = theta0 + kHalfPi;
    for (int k = 0; k < steps; ++k) {
      const ConstrainedStep s = constrained_step_detailed(state);
      const double expected = t1_angle_step(state.theta);
      const double got = std::get<T1Family>(s.next).theta;
      r.max_angle_error = std::max(r.max_angle_error, std::abs(got - expected));
      state = std::get<T1Family>(s.next);
      x = s.eigenvectors;
      ++r.steps_checked;
    }
    r.limit_error = (x - t1_limit()).norm();
    // closed-form check of the geometric rate
    double theta = theta0;
    double rate_error = 0.0;
    for (int k = 1; k <= steps; ++k) {
      theta = t1_angle_step(theta);
      rate_error = std::max(rate_error, std::abs(std::abs(theta + kHalfPi) -
                                                 std::abs(gap0) * std::ldexp(1.0, -k)));
    }
    r.notes.push_back("geometric-rate deviation " + fmt(rate_error));
    check.require(r.max_angle_error < 1e-12,
                  "per-step angle error " + fmt(r.max_angle_error) + " >= 1e-12");
    check.require(r.limit_error < 1e-10, "limit error " + fmt(r.limit_error) + " >= 1e-10");
    check.require(rate_error < 1e-15, "geometric rate deviation " + fmt(rate_error));
  });
  return r;
}

OracleReport verify_last_column(int dim, int steps, std::uint64_t seed) {
  OracleReport r;
  r.name = "tn(n=" + std::to_string(dim) + ")";
  guarded(r, [&] {
    Checker check(r);
    const ComplexMatrix start =
        sample_matrix({EnsembleKind::UpperTriangularConstrained, dim, seed});
    LastColumnFamily state{start.col(dim - 1).real()};
    const Eigen::VectorXd direction = state.x.head(dim - 1).normalized();
    ComplexMatrix x = family_matrix(state);
    double ratio_error = 0.0;
    double angle_error = 0.0;
    for (int k = 0; k < steps; ++k) {
      const ConstrainedStep s = constrained_step_detailed(state);
      const auto& next = std::get<LastColumnFamily>(s.next);
      const LastColumnFamily expected = last_column_analytic_step(state);
      const Eigen::VectorXd lead = next.x.head(dim - 1);
      if (lead.norm() > 0.0) {
        // ratios y_i / y_j == x_i / x_j, measured on the unit direction
        ratio_error = std::max(ratio_error,
                               (lead.normalized() - state.x.head(dim - 1).normalized())
                                   .cwiseAbs()
                                   .maxCoeff());
        ratio_error = std::max(ratio_error, (lead.normalized() - direction).cwiseAbs().maxCoeff());
      }
      const double got_angle = last_column_angles(next.x).back();
      const double want_angle = last_column_angles(expected.x).back();
      angle_error = std::max(angle_error, std::abs(got_angle - want_angle));
      state = next;
      x = s.eigenvectors;
      ++r.steps_checked;
    }
    r.max_angle_error = ratio_error;
    r.limit_error = (x - family_limit(state)).norm();
    r.notes.push_back("final-angle recursion error " + fmt(angle_error));
    check.require(ratio_error < 1e-12, "direction ratio error " + fmt(ratio_error) + " >= 1e-12");
    check.require(angle_error < 1e-12, "final-angle error " + fmt(angle_error) + " >= 1e-12");
    check.require(r.limit_error < 1e-8, "limit error " + fmt(r.limit_error) + " >= 1e-8");
  });
  return r;
}

OracleReport verify_t3(int steps, std::uint64_t seed) {
  OracleReport r;
  r.name = "t3";
  guarded(r, [&] {
    Checker check(r);
    // closed form: t_k = 2^{k+1} - 1 is the k-th successor of t = 0
    double t = 0.0;
    double closed_error = 0.0;
    for (int k = 0; k <= 40; ++k) {
      t = t3_tan2_step(t);
      const double want = std::ldexp(1.0, k + 1) - 1.0;
      closed_error = std::max(closed_error, std::abs(t - want) / want);
    }
    check.require(closed_error == 0.0, "closed-form recursion deviates by " + fmt(closed_error));

    Rng rng(seed);
    std::normal_distribution<double> normal;
    Complex a(normal(rng), normal(rng));
    Complex b(normal(rng), normal(rng));
    const double norm = std::sqrt(std::norm(a) + std::norm(b));
    T3Family state{a / norm, b / norm, 0.0};  // theta = 0

    double tan2_error = 0.0;
    double ratio_error = 0.0;
    double phase_error = 0.0;
    ComplexMatrix x = family_matrix(state);
    for (int k = 0; k < steps; ++k) {
      const ConstrainedStep s = constrained_step_detailed(state);
      const auto& next = std::get<T3Family>(s.next);
      if (k <= 40) {
        const double want = std::ldexp(1.0, k + 1) - 1.0;
        tan2_error = std::max(tan2_error, std::abs(t3_tan2(next) - want) / want);
        const double before = std::abs(state.a) / std::abs(state.b);
        const double after = std::abs(next.a) / std::abs(next.b);
        ratio_error = std::max(ratio_error, std::abs(after - before) / before);
        double d = std::arg(next.a) + std::arg(next.b) - std::arg(state.a) - std::arg(state.b);
        d = std::remainder(d, 2.0 * kPi);
        phase_error = std::max(phase_error, std::abs(d));
      }
      state = next;
      x = s.eigenvectors;
      ++r.steps_checked;
    }
    r.max_angle_error = tan2_error;
    r.limit_error = (x - family_limit(state)).norm();
    r.notes.push_back("|a|/|b| ratio error " + fmt(ratio_error) + ", phase-sum error " +
                      fmt(phase_error));
    check.require(tan2_error < 1e-10, "numerical tan^2 relative error " + fmt(tan2_error));
    check.require(ratio_error < 1e-10, "|x|/|y| != |a|/|b|: " + fmt(ratio_error));
    check.require(phase_error < 1e-10, "phase sum not preserved: " + fmt(phase_error));
    check.require(r.limit_error < 1e-8, "limit error " + fmt(r.limit_error) + " >= 1e-8");
  });
  return r;
}

OracleReport verify_special2x2(int cases, std::uint64_t seed) {
  OracleReport r;
  r.name = "special2";
  guarded(r, [&] {
    Checker check(r);
    Rng rng(seed);
    std::uniform_real_distribution<double> first(0.0, kPi / 4.0);
    std::uniform_real_distribution<double> fourth(-kHalfPi, -kPi / 4.0);
    constexpr int kMaxSteps = 500;
    constexpr double kStop = 1e-10;
    constexpr double kAngleSlack = 1e-13;
    int expansion_binding = 0;
    int max_steps_used = 0;

    for (int c = 0; c < cases && !r.failure; ++c) {
      Special2x2Family state;
      do {
        state = {first(rng), fourth(rng)};
      } while (state.theta1 <= 0.0 || std::abs(state.theta1 - kHalfPi - state.theta2) < 1e-6);

      const ComplexMatrix limit = family_limit(state);
      ComplexMatrix x = family_matrix(state);
      int k = 0;
      while ((x - limit).norm() >= kStop && k < kMaxSteps) {
        const ConstrainedStep s = constrained_step_detailed(state);
        const auto& next = std::get<Special2x2Family>(s.next);
        const std::string where = "case " + std::to_string(c) + " step " + std::to_string(k);
        if (state.theta1 < kPi / 4.0 && state.theta2 < -kPi / 4.0 &&
            std::abs(state.theta1 - kHalfPi - state.theta2) >= 1e-12) {
          const Special2x2Bounds b = special2x2_bounds(state.theta1, state.theta2);
          if (!b.expansion_valid) ++expansion_binding;
          // compared as angles: the tangents blow up near -pi/2
          check.require(next.theta1 <= std::atan(b.tan_theta3_upper) + kAngleSlack,
                        where + ": tan(theta3) bound violated");
          check.require(-next.theta2 >= std::atan(b.tan_abs_theta4_lower) - kAngleSlack,
                        where + ": tan|theta4| bound violated");
          if (b.expansion_valid) {
            check.require(std::tan(state.theta1) - std::tan(next.theta1) >=
                              b.tan_gap_lower - kAngleSlack,
                          where + ": expansion lower bound violated");
          }
        }
        check.require(next.theta1 < state.theta1, where + ": theta1 not strictly decreasing");
        check.require(std::abs(next.theta2) > std::abs(state.theta2),
                      where + ": |theta2| not strictly increasing");
        r.max_angle_error = std::max(r.max_angle_error, next.theta1);
        state = next;
        x = s.eigenvectors;
        ++k;
        ++r.steps_checked;
        if (r.failure) break;
      }
      max_steps_used = std::max(max_steps_used, k);
      r.limit_error = std::max(r.limit_error, (x - limit).norm());
    }
    r.max_angle_error = 0.0;
    r.notes.push_back("expansion precondition delta/cos(theta1) < 1 failed on " +
                      std::to_string(expansion_binding) + " steps");
    r.notes.push_back("longest run " + std::to_string(max_steps_used) + " steps");
    check.require(r.limit_error < 1e-8, "limit error " + fmt(r.limit_error) + " >= 1e-8");
  });
  return r;
}

OracleReport verify_loop() {
  OracleReport r;
  r.name = "loop";
  guarded(r, [&] {
    Checker check(r);
    const auto [a, b] = loop_pair();
    ComplexVector lambda(2);
    lambda << 1.0, 0.5;
    const double ab = frobenius_residual(a, b, lambda);
    const double ba = frobenius_residual(b, a, lambda);
    check.require(ab < 1e-14 && ba < 1e-14,
                  "eigenpair residuals " + fmt(ab) + ", " + fmt(ba) + " >= 1e-14");
    for (const ComplexMatrix* m : {&a, &b}) {
      const GramMetrics g = gram_metrics(*m);
      check.require(std::abs(g.det_gram - 0.25) < 1e-14,
                    "det_gram " + fmt(g.det_gram) + " != 1/4");
    }

    TrajectoryConfig config;
    config.max_iters = 100;
    config.gauge = {EigenOrder::Magnitude, PhaseConvention::LastEntry};
    const Trajectory t = run_trajectory(a, Variant::Eigenbasis, config, 0);
    r.steps_checked = static_cast<int>(t.records.size()) - 1;
    r.limit_error = t.cycle_distance;
    check.require(t.final_status == Status::Cycling,
                  "loop not flagged: status " + std::string(to_string(t.final_status)));
    check.require(r.steps_checked <= 2 * config.cycle_window,
                  "cycle flagged only after " + std::to_string(r.steps_checked) + " iterations");

    config.gauge = {};
    const Trajectory canonical = run_trajectory(a, Variant::Eigenbasis, config, 0);
    r.notes.push_back("default gauge outcome: " + std::string(to_string(canonical.final_status)) +
                      " after " + std::to_string(canonical.records.size() - 1) + " iterations");
  });
  return r;
}

OracleReport verify_discontinuity(double eps) {
  OracleReport r;
  r.name = "discontinuity";
  guarded(r, [&] {
    Checker check(r);
    const auto [a, d] = discontinuity_pair(eps);
    const GramMetrics g = gram_metrics(d.vectors);
    r.steps_checked = 1;
    r.limit_error = (a - ComplexMatrix::Identity(2, 2)).norm();
    r.max_angle_error = g.offdiag_max;
    // second eigenvector (eigenvalue sqrt(1 - eps^2)) ~ (+-sqrt(1 - delta^2), delta)
    const ComplexVector v = eigenvector_near(d, std::sqrt(1.0 - eps * eps));
    const double delta = std::min(std::abs(v(0)), std::abs(v(1)));
    r.notes.push_back("offdiag_max " + fmt(g.offdiag_max) + ", delta " + fmt(delta));
    check.require(r.limit_error < 2.0 * eps, "input not within 2 eps of identity");
    check.require(g.offdiag_max > 0.9, "offdiag_max " + fmt(g.offdiag_max) + " <= 0.9");
    check.require(std::abs(v(1)) < std::abs(v(0)), "second eigenvector not dominated by x");
  });
  return r;
}

OracleReport verify_corollary(int stage1_steps, int stage2_steps, std::uint64_t seed) {
  OracleReport r;
  r.name = "corollary";
  guarded(r, [&] {
    Checker check(r);
    Rng rng(seed);
    std::uniform_real_distribution<double> angle(-kHalfPi * 0.9, -0.1);
    std::normal_distribution<double> normal;
    // [[1, cos t, p], [0, sin t, q], [0, 0, s]] with a unit third column
    ComplexMatrix x = ComplexMatrix::Zero(3, 3);
    const double t = angle(rng);
    Eigen::Vector3d third(normal(rng), normal(rng), std::abs(normal(rng)) + 0.1);
    third.normalize();
    x(0, 0) = 1.0;
    x(0, 1) = std::cos(t);
    x(1, 1) = std::sin(t);
    x.col(2) = third.cast<Complex>();

    // Column k is the eigenvector of the diagonal entry x(k, k).
    auto constrained = [&](const ComplexMatrix& a, bool third_imaginary) {
      const Eigendecomposition d = eigendecompose(a);
      ComplexMatrix out(3, 3);
      ComplexVector c0 = eigenvector_near(d, a(0, 0));
      ComplexVector c1 = eigenvector_near(d, a(1, 1));
      ComplexVector c2 = eigenvector_near(d, a(2, 2));
      set_phase(c0, 0, 1.0);
      set_phase(c1, 1, -1.0);
      if (third_imaginary) {
        set_phase(c2, 2, kI);
      } else {
        fix_phase(c2, phase_pivot(c2));
      }
      out << c0, c1, c2;
      return out;
    };

    for (int k = 0; k < stage1_steps; ++k, ++r.steps_checked) x = constrained(x, false);
    const double eps1 = std::abs(x(0, 1));
    const double delta1 = std::abs(x(1, 1) + 1.0);
    r.notes.push_back("after stage 1: |eps| " + fmt(eps1) + ", |delta| " + fmt(delta1));
    check.require(delta1 < 1e-6, "stage 1: (2,2) entry not within 1e-6 of -1");
    check.require(eps1 < 1e-3, "stage 1: (1,2) entry not small");

    for (int k = 0; k < stage2_steps; ++k, ++r.steps_checked) x = constrained(x, true);
    r.limit_error = (x - diag_limit({1.0, -1.0, kI})).norm();
    check.require(r.limit_error < 1e-8, "stage 2 limit error " + fmt(r.limit_error));
  });
  return r;
}

}  // namespace eigenflow
