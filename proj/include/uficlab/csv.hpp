#pragma once

#include <map>
#include <string>
#include <vector>

#include "uficlab/types.hpp"

namespace uficlab {

/// Shortest decimal string that parses back to exactly the same double.
std::string double_to_string(double v);
/// Inverse of double_to_string; throws ParseError on malformed input.
double string_to_double(const std::string& s, long line = 0);

/// Numeric CSV with optional `# key=value` metadata comments before the header.
/// Doubles are written round-trip exact, so write/read is a bit-exact identity.
struct CsvTable {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> columns;
  MatRM data;  // rows x columns

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index col_index(const std::string& name) const;  // throws ParseError if absent

  void write(const std::string& path) const;
  static CsvTable read(const std::string& path);
};

}  // namespace uficlab
