#include "twr/archive.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

namespace twr {

namespace {

constexpr char kMagic[4] = {'R', 'M', 'A', 'P'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t take_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

double take_f64(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_range_map_archive(const std::filesystem::path& path, const RangeMap& map) {
  detail::require(map.data.size() > 0, "refusing to write an empty range map");
  std::string bytes;
  bytes.reserve(29 + static_cast<std::size_t>(map.data.size()) * 16);
  bytes.append(kMagic, 4);
  bytes.push_back(static_cast<char>(kVersion));
  put_u32(bytes, static_cast<std::uint32_t>(map.data.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(map.data.cols()));
  put_f64(bytes, map.bin_spacing_m);
  put_f64(bytes, map.prf_hz);
  for (Index r = 0; r < map.data.rows(); ++r)
    for (Index c = 0; c < map.data.cols(); ++c) {
      put_f64(bytes, map.data(r, c).real());
      put_f64(bytes, map.data(r, c).imag());
    }
  atomic_write(path, bytes);
}

RangeMap read_range_map_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open archive: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 29 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::runtime_error("not a range-map archive: " + path.string());
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion)
    throw std::runtime_error("unsupported archive version in " + path.string());

  const std::uint32_t rows = take_u32(bytes.data() + 5);
  const std::uint32_t cols = take_u32(bytes.data() + 9);
  RangeMap map;
  map.bin_spacing_m = take_f64(bytes.data() + 13);
  map.prf_hz = take_f64(bytes.data() + 21);
  const std::size_t expected = 29 + std::size_t(rows) * std::size_t(cols) * 16;
  if (rows == 0 || cols == 0 || bytes.size() != expected)
    throw std::runtime_error("truncated or malformed archive: " + path.string());

  map.data.resize(rows, cols);
  const char* p = bytes.data() + 29;
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      map.data(r, c) = {take_f64(p), take_f64(p + 8)};
      p += 16;
    }
  return map;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  atomic_write(path, content);
}

namespace detail {

std::string format_double(double value) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  detail::require(ec == std::errc(), "double formatting failed");
  return std::string(buffer, end);
}

}  // namespace detail

namespace {

void append_matrix_rows(std::string& out, const MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      out += detail::format_double(m(r, c));
    }
    out.push_back('\n');
  }
}

}  // namespace

std::string range_map_csv(const RangeMap& map) {
  std::string out;
  out += "# rangemap rows=" + std::to_string(map.data.rows()) +
         " cols=" + std::to_string(map.data.cols()) + "\n";
  out += "# bin_spacing_m=" + detail::format_double(map.bin_spacing_m) +
         " prf_hz=" + detail::format_double(map.prf_hz) + "\n";
  append_matrix_rows(out, map.data.cwiseAbs());
  return out;
}

std::string spectrogram_csv(const Spectrogram& spec) {
  std::string out;
  out += "# spectrogram doppler_bins=" + std::to_string(spec.doppler_bins()) +
         " frames=" + std::to_string(spec.frames()) + "\n";
  out += "# freq_hz_first=" + detail::format_double(spec.frequency_hz(0)) + " freq_hz_step=" +
         detail::format_double(spec.frequency_hz.size() > 1
                                   ? spec.frequency_hz(1) - spec.frequency_hz(0)
                                   : 0.0) +
         "\n";
  out += "# time_s_first=" + detail::format_double(spec.time_s(0)) + " time_s_step=" +
         detail::format_double(spec.time_s.size() > 1 ? spec.time_s(1) - spec.time_s(0) : 0.0) +
         "\n";
  append_matrix_rows(out, spec.data);
  return out;
}

MatrixXd db_image(const MatrixXd& values, double floor_db, bool power) {
  detail::require(values.size() > 0, "image is empty");
  detail::require(floor_db > 0.0, "dB floor must be positive");
  detail::require(values.minCoeff() >= 0.0, "image entries must be nonnegative");
  const double peak = values.maxCoeff();
  if (peak <= 0.0) return MatrixXd::Zero(values.rows(), values.cols());
  const double scale = power ? 10.0 : 20.0;
  const double floor_ratio = std::pow(10.0, -floor_db / scale);
  return ((values.array().max(peak * floor_ratio) / peak).log10() * scale + floor_db) / floor_db;
}

std::string pgm_image(const MatrixXd& image) {
  detail::require(image.size() > 0, "image is empty");
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) +
                    "\n255\n";
  for (Index r = 0; r < image.rows(); ++r)
    for (Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(image(r, c), 0.0, 1.0);
      out.push_back(static_cast<char>(std::lround(v * 255.0)));
    }
  return out;
}

void write_pgm(const std::filesystem::path& path, const MatrixXd& image) {
  atomic_write(path, pgm_image(image));
}

std::string confusion_text(const ConfusionMatrix& confusion,
                           const std::vector<std::string>& class_names) {
  const Index n = confusion.counts.rows();
  detail::require(static_cast<Index>(class_names.size()) == n,
                  "class name count does not match the matrix");
  const MatrixXd fractions = confusion.fractions();

  std::size_t width = 8;
  for (const auto& name : class_names) width = std::max(width, name.size() + 2);

  std::ostringstream out;
  auto cell = [&](const std::string& s) {
    out << s;
    for (std::size_t i = s.size(); i < width; ++i) out << ' ';
  };
  auto fraction_cell = [&](double v) {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "%.2f", v);
    cell(buffer);
  };

  cell("true\\pred");
  for (const auto& name : class_names) cell(name);
  out << '\n';
  for (Index r = 0; r < n; ++r) {
    cell(class_names[static_cast<std::size_t>(r)]);
    for (Index c = 0; c < n; ++c) fraction_cell(fractions(r, c));
    out << '\n';
  }
  char accuracy[64];
  std::snprintf(accuracy, sizeof(accuracy), "accuracy %.4f\n", confusion.accuracy());
  out << accuracy;
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& confusion,
                          const std::vector<std::string>& class_names) {
  const Index n = confusion.counts.rows();
  detail::require(static_cast<Index>(class_names.size()) == n,
                  "class name count does not match the matrix");
  const MatrixXd fractions = confusion.fractions();
  std::string out = "true\\pred";
  for (const auto& name : class_names) out += "," + name;
  out.push_back('\n');
  for (Index r = 0; r < n; ++r) {
    out += class_names[static_cast<std::size_t>(r)];
    for (Index c = 0; c < n; ++c) out += "," + detail::format_double(fractions(r, c));
    out.push_back('\n');
  }
  return out;
}

}  // namespace twr
