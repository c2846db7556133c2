#pragma once

#include <string>

#include "twr/range_map.hpp"
#include "twr/types.hpp"

namespace twr {

/// Contiguous range-bin interval, both ends inclusive.
struct RangeGate {
  Index m1 = 0;
  Index m2 = 0;

  Index width() const { return m2 - m1 + 1; }

  void validate(Index bins) const {
    detail::require(m1 >= 0 && m1 <= m2 && m2 < bins, "gate must satisfy 0 <= m1 <= m2 < bins");
  }
};

enum class WindowKind { hann, rectangular };

WindowKind window_kind_from_string(const std::string& name);
std::string to_string(WindowKind kind);

struct StftParams {
  Index window_len = 32;
  Index overlap = 31;
  Index fft_size = 128;
  WindowKind window_kind = WindowKind::hann;

  Index hop() const { return window_len - overlap; }

  void validate() const {
    detail::require(window_len >= 1, "window_len must be >= 1");
    detail::require(overlap >= 0 && overlap < window_len, "overlap must lie in [0, window_len)");
    detail::require(fft_size >= window_len, "fft_size must be >= window_len");
  }
};

/// Power spectrogram, fft_size Doppler rows by frame columns.
/// Row 0 sits at -prf/2; zero Doppler is row fft_size/2.
struct Spectrogram {
  MatrixXd data;
  VectorXd frequency_hz;
  VectorXd time_s;

  Index doppler_bins() const { return data.rows(); }
  Index frames() const { return data.cols(); }
};

/// Taper of the requested kind, length n.
VectorXd make_window(WindowKind kind, Index n);

/// Smallest contiguous interval that contains the peak-energy bin and holds at
/// least `energy_fraction` of the total magnitude-squared energy. Ties go to
/// the window centered nearest the peak, then to the smaller start index.
RangeGate select_range_gate(const MatrixXcd& data, double energy_fraction);
RangeGate select_range_gate(const RangeMap& map, double energy_fraction);

/// Coherent sum of the gated bins, one value per slow-time sample.
VectorXcd range_stack(const MatrixXcd& data, const RangeGate& gate);
VectorXcd range_stack(const RangeMap& map, const RangeGate& gate);

/// Strongest gated bin per slow-time sample, ties toward the smaller index.
VectorXcd range_max_stack(const MatrixXcd& data, const RangeGate& gate);
VectorXcd range_max_stack(const RangeMap& map, const RangeGate& gate);

/// Sliding-window power spectrum of a slow-time signal. Only full windows are
/// emitted; each frame is tapered, transformed at fft_size, squared in
/// magnitude, and rotated so negative Doppler comes first.
Spectrogram spectrogram(const VectorXcd& signal, const StftParams& params, double prf_hz);

}  // namespace twr
