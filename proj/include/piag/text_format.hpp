#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace piag {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::string format_vector(const Eigen::VectorXd& v);
Eigen::VectorXd parse_vector(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Flat `key = value` document. Lines starting with '#' are comments.
/// Keys keep insertion order on output so serialisation is byte-stable.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::string_view text);
  static KeyValueDoc read_file(const std::string& path);

  void set(const std::string& key, std::string value);
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, long long value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, const Eigen::VectorXd& value) { set(key, format_vector(value)); }

  bool contains(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_integer(const std::string& key) const;
  long long get_integer(const std::string& key, long long fallback) const;
  Eigen::VectorXd get_vector(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string to_string() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomically(const std::string& path, const std::string& contents);

}  // namespace piag
