#include "twr/range_map.hpp"

#include <unsupported/Eigen/FFT>

#include <vector>

namespace twr {

Index next_power_of_two_above(Index n) {
  detail::require(n >= 1, "bin count must be positive");
  Index m = 1;
  while (m <= n) m *= 2;
  return m;
}

RangeMap form_range_map(const FrequencyFrame& frame) {
  detail::require(frame.data.size() > 0, "frequency frame is empty");
  detail::require(frame.data.rows() == frame.sweep.n_freq,
                  "frame rows must match sweep bin count");

  const Index n = frame.data.rows();
  const Index m = next_power_of_two_above(n);

  RangeMap map;
  map.bin_spacing_m = kSpeedOfLight / (2.0 * static_cast<double>(m) * frame.sweep.delta_f_hz);
  map.prf_hz = frame.sweep.prf_hz;
  map.data.resize(m, frame.data.cols());

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> padded(static_cast<std::size_t>(m));
  std::vector<std::complex<double>> profile(static_cast<std::size_t>(m));
  for (Index t = 0; t < frame.data.cols(); ++t) {
    std::fill(padded.begin(), padded.end(), std::complex<double>{});
    for (Index i = 0; i < n; ++i) padded[static_cast<std::size_t>(i)] = frame.data(i, t);
    fft.inv(profile, padded);  // scales by 1/M
    for (Index i = 0; i < m; ++i) map.data(i, t) = profile[static_cast<std::size_t>(i)];
  }
  return map;
}

VectorXd range_axis(const RangeMap& map) {
  detail::require(map.data.size() > 0, "range map is empty");
  return VectorXd::LinSpaced(map.bins(), 0.0,
                             map.bin_spacing_m * static_cast<double>(map.bins() - 1));
}

MatrixXcd mean_subtract_rows(const MatrixXcd& data) {
  detail::require(data.cols() >= 2, "mean subtraction needs at least two slow-time samples");
  return data.colwise() - data.rowwise().mean();
}

RangeMap mean_subtract(const RangeMap& map) {
  RangeMap out;
  out.bin_spacing_m = map.bin_spacing_m;
  out.prf_hz = map.prf_hz;
  out.data = mean_subtract_rows(map.data);
  return out;
}

}  // namespace twr
