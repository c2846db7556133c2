#pragma once

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

#include "twr/rng.hpp"
#include "twr/types.hpp"

namespace twr {

/// Solver knobs for the augmented-Lagrange iteration on
/// min |L|_* + lambda |S|_1 s.t. D = L + S.
template <typename Real>
struct RpcaParams {
  Real lambda = Real(0);  // 0 selects 1/sqrt(max(m, n)) at solve time
  Real mu0 = Real(0);     // 0 selects 1.25 / sigma_1(D)
  Real rho = Real(1.5);
  Real tol = Real(1e-7);
  int max_iter = 500;

  void validate() const {
    detail::require(lambda >= Real(0) && std::isfinite(lambda), "lambda must be >= 0 and finite");
    detail::require(mu0 >= Real(0) && std::isfinite(mu0), "mu0 must be >= 0 and finite");
    detail::require(rho > Real(1), "rho must exceed 1");
    detail::require(tol > Real(0) && tol < Real(1), "tol must lie in (0, 1)");
    detail::require(max_iter >= 1, "max_iter must be >= 1");
  }
};

template <typename Real>
struct RpcaResult {
  ComplexMatrix<Real> low_rank;
  ComplexMatrix<Real> sparse;
  int iterations = 0;
  Real residual = Real(0);  // |D - L - S|_F / |D|_F at exit
  Index rank_estimate = 0;
  bool converged = false;
};

/// The recovery weight 1/sqrt(max(m, n)).
template <typename Real = double>
Real default_lambda(Index m, Index n) {
  detail::require(m >= 1 && n >= 1, "matrix dimensions must be positive");
  return Real(1) / std::sqrt(static_cast<Real>(std::max(m, n)));
}

/// Soft-thresholds the magnitude and keeps the argument:
/// x * max(|x| - tau, 0) / |x|, with 0 mapped to 0.
template <typename Real>
std::complex<Real> complex_shrink(std::complex<Real> x, Real tau) {
  const Real magnitude = std::abs(x);
  if (magnitude <= tau || magnitude == Real(0)) return {Real(0), Real(0)};
  return x * ((magnitude - tau) / magnitude);
}

namespace detail {

template <typename Real>
struct ThinSvd {
  ComplexMatrix<Real> u;
  DenseVector<Real> singular_values;
  ComplexMatrix<Real> v;
};

/// Deterministic power iteration for the spectral norm.
template <typename Real>
Real spectral_norm_estimate(const ComplexMatrix<Real>& a, int iterations = 40) {
  if (a.size() == 0) return Real(0);
  ComplexVector<Real> x = ComplexVector<Real>::Ones(a.cols());
  x /= x.norm();
  Real sigma = Real(0);
  for (int i = 0; i < iterations; ++i) {
    ComplexVector<Real> y = a * x;
    const Real norm_y = y.norm();
    if (norm_y == Real(0)) return Real(0);
    x = a.adjoint() * (y / norm_y);
    const Real norm_x = x.norm();
    if (norm_x == Real(0)) return norm_y;
    x /= norm_x;
    const Real next = norm_x;
    if (i > 4 && std::abs(next - sigma) <= Real(1e-12) * std::max(next, Real(1))) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return sigma;
}

/// Randomized thin SVD capturing roughly the top `target` singular triplets.
/// One power pass keeps the tail accurate enough for thresholding.
template <typename Real>
ThinSvd<Real> randomized_thin_svd(const ComplexMatrix<Real>& a, Index target,
                                  std::uint64_t seed) {
  const Index k = std::min<Index>(target, std::min(a.rows(), a.cols()));
  RandomStream rng(mix_seed(seed, 0x52535644ULL));
  ComplexMatrix<Real> omega(a.cols(), k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < a.cols(); ++i)
      omega(i, j) = std::complex<Real>(static_cast<Real>(rng.gaussian()),
                                       static_cast<Real>(rng.gaussian()));

  ComplexMatrix<Real> sample = a * omega;
  sample = a * (a.adjoint() * sample).eval();
  Eigen::HouseholderQR<ComplexMatrix<Real>> qr(sample);
  ComplexMatrix<Real> q = qr.householderQ() * ComplexMatrix<Real>::Identity(a.rows(), k);

  ComplexMatrix<Real> small = q.adjoint() * a;
  Eigen::BDCSVD<ComplexMatrix<Real>> svd(small, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd<Real> out;
  out.u = q * svd.matrixU();
  out.singular_values = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

template <typename Real>
ThinSvd<Real> full_thin_svd(const ComplexMatrix<Real>& a) {
  Eigen::BDCSVD<ComplexMatrix<Real>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Singular-value soft thresholding with a rank-guided partial SVD. Falls back
/// to the full decomposition whenever the partial basis could saturate.
template <typename Real>
std::pair<ComplexMatrix<Real>, Index> thresholded_svd(const ComplexMatrix<Real>& a, Real tau,
                                                      Index predicted_rank,
                                                      std::uint64_t seed) {
  const Index max_rank = std::min(a.rows(), a.cols());
  // the randomized probe only beats the full decomposition while it stays
  // well under half the spectrum
  const Index probe_cap = std::min<Index>(max_rank / 3, 56);
  ThinSvd<Real> svd;
  bool partial = predicted_rank > 0 && predicted_rank + 8 <= probe_cap;
  if (partial) {
    svd = randomized_thin_svd(a, predicted_rank + 8, seed);
    Index surviving = 0;
    for (Index i = 0; i < svd.singular_values.size(); ++i)
      if (svd.singular_values(i) > tau) ++surviving;
    if (surviving + 2 >= svd.singular_values.size()) partial = false;  // saturated, redo exactly
  }
  if (!partial) svd = full_thin_svd(a);

  Index rank = 0;
  for (Index i = 0; i < svd.singular_values.size(); ++i)
    if (svd.singular_values(i) > tau) ++rank;

  if (rank == 0) return {ComplexMatrix<Real>::Zero(a.rows(), a.cols()), 0};
  const auto shrunk =
      (svd.singular_values.head(rank).array() - tau).matrix().template cast<std::complex<Real>>();
  ComplexMatrix<Real> reconstructed = svd.u.leftCols(rank) * shrunk.asDiagonal() *
                                      svd.v.leftCols(rank).adjoint();
  return {std::move(reconstructed), rank};
}

}  // namespace detail

/// Soft-thresholds the singular values of A and reconstructs; returns the
/// surviving rank. Always uses the full thin SVD.
template <typename Real>
std::pair<ComplexMatrix<Real>, Index> singular_value_threshold(const ComplexMatrix<Real>& a,
                                                               Real tau) {
  detail::require(tau >= Real(0), "threshold must be nonnegative");
  detail::require(a.size() > 0, "matrix is empty");
  return detail::thresholded_svd(a, tau, Index(0), 0);
}

/// Inexact augmented-Lagrange iteration for D = L + S:
///   L <- SVT_{1/mu}(D - S + Y/mu)
///   S <- shrink(D - L + Y/mu, lambda/mu)
///   Y <- Y + mu (D - L - S),  mu <- min(rho mu, mu_max)
/// until |D - L - S|_F <= tol |D|_F.
template <typename Real>
RpcaResult<Real> rpca_decompose(const ComplexMatrix<Real>& d, RpcaParams<Real> params) {
  detail::require(d.size() > 0, "observation matrix is empty");
  detail::require(d.allFinite(), "observation matrix has non-finite entries");
  params.validate();

  const Index m = d.rows();
  const Index n = d.cols();
  const Real lambda = params.lambda > Real(0) ? params.lambda : default_lambda<Real>(m, n);

  RpcaResult<Real> result;
  const Real norm_d = d.norm();
  if (norm_d == Real(0)) {
    result.low_rank = ComplexMatrix<Real>::Zero(m, n);
    result.sparse = ComplexMatrix<Real>::Zero(m, n);
    result.iterations = 1;
    result.converged = true;
    return result;
  }

  const Real sigma1 = detail::spectral_norm_estimate(d);
  const Real inf_norm = d.cwiseAbs().maxCoeff();
  Real mu = params.mu0 > Real(0) ? params.mu0 : Real(1.25) / sigma1;
  const Real mu_max = mu * Real(1e7);

  ComplexMatrix<Real> y = d / std::max(sigma1, inf_norm / lambda);
  ComplexMatrix<Real> low_rank = ComplexMatrix<Real>::Zero(m, n);
  ComplexMatrix<Real> sparse = ComplexMatrix<Real>::Zero(m, n);

  Index predicted_rank = 10;
  Index rank = 0;
  for (int iter = 1; iter <= params.max_iter; ++iter) {
    std::tie(low_rank, rank) = detail::thresholded_svd<Real>(
        d - sparse + y / mu, Real(1) / mu, predicted_rank, static_cast<std::uint64_t>(iter));
    predicted_rank = rank < predicted_rank ? rank + 1
                                           : std::min<Index>(rank + 1 + n / 20, std::min(m, n));

    const Real threshold = lambda / mu;
    sparse = (d - low_rank + y / mu)
                 .unaryExpr([threshold](std::complex<Real> x) {
                   return complex_shrink(x, threshold);
                 });

    const ComplexMatrix<Real> gap = d - low_rank - sparse;
    y += mu * gap;
    result.iterations = iter;
    result.residual = gap.norm() / norm_d;
    if (result.residual <= params.tol) {
      result.converged = true;
      break;
    }
    mu = std::min(mu * params.rho, mu_max);
  }

  result.low_rank = std::move(low_rank);
  result.sparse = std::move(sparse);
  result.rank_estimate = rank;
  return result;
}

template <typename Real>
RpcaResult<Real> rpca_decompose(const ComplexMatrix<Real>& d) {
  return rpca_decompose(d, RpcaParams<Real>{});
}

}  // namespace twr
