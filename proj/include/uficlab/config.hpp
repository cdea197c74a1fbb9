#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uficlab/types.hpp"

namespace uficlab {

/// Flat key=value configuration. Lines are `key = value`, '#' starts a comment,
/// blank lines ignored. Dotted keys group settings (surface.mu, train.epochs).
/// Values keep their raw text; typed getters parse on access.
class Config {
public:
  static Config load(const std::string& path);
  static Config from_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  Vec6 get_vec6(const std::string& key) const;
  Vec6 get_vec6(const std::string& key, const Vec6& fallback) const;

  void set(const std::string& key, const std::string& value);

  /// Keys sharing a dotted prefix, e.g. prefix "surface." -> surface.mu, ...
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  /// Sorted `key=value` lines with normalized whitespace; hash input.
  std::string canonical_text() const;
  /// FNV-1a 64 over canonical_text, hex encoded. Stamped into every artifact.
  std::string hash() const;

private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// FNV-1a 64-bit over a byte string, lowercase hex. Used for config and file hashes.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace uficlab
