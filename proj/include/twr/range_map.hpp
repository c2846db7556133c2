#pragma once

#include "twr/signal_model.hpp"
#include "twr/types.hpp"

namespace twr {

/// Range profile over slow time: M range bins x n_slow samples. M is the
/// smallest power of two above the sweep's bin count and the range axis step
/// is c / (2 M delta_f).
struct RangeMap {
  MatrixXcd data;
  double bin_spacing_m = 0.0;
  double prf_hz = 0.0;

  Index bins() const { return data.rows(); }
  Index slow_samples() const { return data.cols(); }
};

/// Smallest power of two strictly greater than n.
Index next_power_of_two_above(Index n);

/// Inverse DFT (1/M normalization) of each zero-padded frequency column.
RangeMap form_range_map(const FrequencyFrame& frame);

/// Range of each bin: entry m equals m * bin_spacing.
VectorXd range_axis(const RangeMap& map);

/// Removes the slow-time mean of every row. Output rows have zero mean.
MatrixXcd mean_subtract_rows(const MatrixXcd& data);
RangeMap mean_subtract(const RangeMap& map);

}  // namespace twr
