#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace twr {

/// Flat key=value configuration. '#' starts a comment, blank lines are
/// skipped, later assignments win. Keys are dotted paths like
/// `wall.thickness_m`.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Canonical "key=value" lines, sorted by key.
  std::string canonical_text() const;

  /// FNV-1a of the canonical text, as 16 hex digits.
  std::string content_hash() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// FNV-1a 64-bit over arbitrary bytes.
std::uint64_t fnv1a_hash(const std::string& bytes);

}  // namespace twr
