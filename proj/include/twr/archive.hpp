#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "twr/classify.hpp"
#include "twr/range_map.hpp"
#include "twr/tfr.hpp"
#include "twr/types.hpp"

namespace twr {

/// Binary range-map file: magic "RMAP", version byte, little-endian u32 rows
/// and cols, f64 bin spacing and prf, then row-major (real, imag) f64 pairs.
/// Writes go to a temporary file first and are renamed into place.
void write_range_map_archive(const std::filesystem::path& path, const RangeMap& map);
RangeMap read_range_map_archive(const std::filesystem::path& path);

/// Atomic text write (temp file + rename).
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Magnitude CSV, one row per range bin, '#' header lines with the axes.
std::string range_map_csv(const RangeMap& map);

/// Power CSV, one row per Doppler bin, '#' header lines with both axes.
std::string spectrogram_csv(const Spectrogram& spec);

/// Rescales a nonnegative map to [0, 1] in dB relative to its peak, clamped
/// floor_db below the peak. `power` selects 10 log10 over 20 log10.
MatrixXd db_image(const MatrixXd& values, double floor_db, bool power);

/// 8-bit binary graymap; values clamped to [0, 1], row 0 at the top.
std::string pgm_image(const MatrixXd& image);
void write_pgm(const std::filesystem::path& path, const MatrixXd& image);

/// Aligned table of row-normalized fractions, two decimals, plus per-row and
/// overall accuracy.
std::string confusion_text(const ConfusionMatrix& confusion,
                           const std::vector<std::string>& class_names);
std::string confusion_csv(const ConfusionMatrix& confusion,
                          const std::vector<std::string>& class_names);

namespace detail {
/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
}  // namespace detail

}  // namespace twr
