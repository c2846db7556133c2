#pragma once

#include <Eigen/Core>

#include <complex>
#include <stdexcept>

namespace twr {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Real>
using ComplexMatrix = DenseMatrix<std::complex<Real>>;
template <typename Real>
using ComplexVector = DenseVector<std::complex<Real>>;

using MatrixXd = DenseMatrix<double>;
using MatrixXcd = ComplexMatrix<double>;
using VectorXd = DenseVector<double>;
using VectorXcd = ComplexVector<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

namespace detail {

inline void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace detail

}  // namespace twr
