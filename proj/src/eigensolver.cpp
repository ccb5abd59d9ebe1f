#include <algorithm>
#include <complex>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "eigenflow/linalg.hpp"

namespace eigenflow {

RawEigenpairs solve_eigenpairs(const ComplexMatrix& a) {
  require_square_finite(a, "solve_eigenpairs");
  const auto n = static_cast<lapack_int>(a.rows());

  ComplexMatrix work = a;  // zgeev overwrites its input
  RawEigenpairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);

  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, out.values.data(),
                    nullptr, 1, out.vectors.data(), n);
  if (info != 0) {
    throw Error(ErrorCode::NumericalFailure,
                "zgeev returned info=" + std::to_string(info));
  }
  if (!out.values.allFinite() || !out.vectors.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "zgeev produced non-finite output");
  }
  return out;
}

}  // namespace eigenflow

namespace eigenflow {

Eigen::VectorXd singular_values(const ComplexMatrix& x) {
  const auto m = static_cast<lapack_int>(x.rows());
  const auto n = static_cast<lapack_int>(x.cols());
  ComplexMatrix work = x;
  Eigen::VectorXd sigma(std::min(m, n));
  std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(1, std::min(m, n))));
  const lapack_int info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', m, n, work.data(), m,
                                         sigma.data(), nullptr, 1, nullptr, 1, superb.data());
  if (info != 0) {
    throw Error(ErrorCode::NumericalFailure, "zgesvd returned info=" + std::to_string(info));
  }
  return sigma;
}

}  // namespace eigenflow
