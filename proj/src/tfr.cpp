#include "twr/tfr.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace twr {

WindowKind window_kind_from_string(const std::string& name) {
  if (name == "hann" || name == "hanning") return WindowKind::hann;
  if (name == "rect" || name == "rectangular") return WindowKind::rectangular;
  throw std::invalid_argument("unknown window kind: " + name);
}

std::string to_string(WindowKind kind) {
  return kind == WindowKind::hann ? "hann" : "rectangular";
}

VectorXd make_window(WindowKind kind, Index n) {
  detail::require(n >= 1, "window length must be >= 1");
  if (kind == WindowKind::rectangular) return VectorXd::Ones(n);
  VectorXd w(n);
  for (Index i = 0; i < n; ++i)
    w(i) = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * double(i) / double(n)));
  return w;
}

RangeGate select_range_gate(const MatrixXcd& data, double energy_fraction) {
  detail::require(data.size() > 0, "range map is empty");
  detail::require(energy_fraction > 0.0 && energy_fraction <= 1.0,
                  "energy fraction must lie in (0, 1]");

  const Index bins = data.rows();
  const VectorXd energy = data.cwiseAbs2().rowwise().sum();
  Index peak = 0;
  energy.maxCoeff(&peak);
  detail::require(energy(peak) > 0.0, "range map carries no energy");

  // prefix(i) = energy of bins [0, i); the full-extent sum reproduces the
  // total exactly, so fraction 1.0 stays satisfiable.
  VectorXd prefix = VectorXd::Zero(bins + 1);
  for (Index i = 0; i < bins; ++i) prefix(i + 1) = prefix(i) + energy(i);
  const double target = energy_fraction * prefix(bins);

  RangeGate best{0, bins - 1};
  double best_offset = std::numeric_limits<double>::infinity();
  bool found = false;
  Index m2 = peak;
  for (Index m1 = 0; m1 <= peak; ++m1) {
    if (m2 < m1) m2 = m1;
    while (m2 < bins && prefix(m2 + 1) - prefix(m1) < target) ++m2;
    if (m2 == bins) break;  // no window starting at or after m1 reaches the target
    const double offset = std::abs(0.5 * double(m1 + m2) - double(peak));
    const Index width = m2 - m1 + 1;
    if (!found || width < best.width() ||
        (width == best.width() && offset < best_offset)) {
      best = {m1, m2};
      best_offset = offset;
      found = true;
    }
  }
  detail::require(found, "no gate reaches the requested energy fraction");
  return best;
}

RangeGate select_range_gate(const RangeMap& map, double energy_fraction) {
  return select_range_gate(map.data, energy_fraction);
}

VectorXcd range_stack(const MatrixXcd& data, const RangeGate& gate) {
  gate.validate(data.rows());
  return data.middleRows(gate.m1, gate.width()).colwise().sum().transpose();
}

VectorXcd range_stack(const RangeMap& map, const RangeGate& gate) {
  return range_stack(map.data, gate);
}

VectorXcd range_max_stack(const MatrixXcd& data, const RangeGate& gate) {
  gate.validate(data.rows());
  VectorXcd out(data.cols());
  for (Index t = 0; t < data.cols(); ++t) {
    Index arg = gate.m1;
    double best = std::abs(data(gate.m1, t));
    for (Index m = gate.m1 + 1; m <= gate.m2; ++m) {
      const double magnitude = std::abs(data(m, t));
      if (magnitude > best) {
        best = magnitude;
        arg = m;
      }
    }
    out(t) = data(arg, t);
  }
  return out;
}

VectorXcd range_max_stack(const RangeMap& map, const RangeGate& gate) {
  return range_max_stack(map.data, gate);
}

Spectrogram spectrogram(const VectorXcd& signal, const StftParams& params, double prf_hz) {
  params.validate();
  detail::require(prf_hz > 0.0, "prf must be positive");
  detail::require(signal.size() >= params.window_len, "signal shorter than the window");

  const Index k = params.fft_size;
  const Index hop = params.hop();
  const Index frames = (signal.size() - params.window_len) / hop + 1;
  const Index half = k / 2;
  const VectorXd window = make_window(params.window_kind, params.window_len);

  Spectrogram spec;
  spec.data.resize(k, frames);
  spec.frequency_hz =
      VectorXd::LinSpaced(k, double(-half), double(k - 1 - half)) * (prf_hz / double(k));
  spec.time_s.resize(frames);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> frame(static_cast<std::size_t>(k));
  std::vector<std::complex<double>> transformed(static_cast<std::size_t>(k));
  for (Index n = 0; n < frames; ++n) {
    const Index start = n * hop;
    for (Index i = 0; i < params.window_len; ++i)
      frame[static_cast<std::size_t>(i)] = signal(start + i) * window(i);
    std::fill(frame.begin() + params.window_len, frame.end(), std::complex<double>(0.0, 0.0));
    fft.fwd(transformed, frame);
    // rotate so row 0 is -prf/2: output row r holds DFT bin (r + half) mod k
    for (Index r = 0; r < k; ++r)
      spec.data(r, n) = std::norm(transformed[static_cast<std::size_t>((r + half) % k)]);
    spec.time_s(n) = (double(start) + 0.5 * double(params.window_len - 1)) / prf_hz;
  }
  return spec;
}

}  // namespace twr
