#include "uficlab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace uficlab {

std::string double_to_string(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double string_to_double(const std::string& s, long line) {
  double out = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e)
    throw ParseError("malformed number '" + s + "'", line);
  return out;
}

Eigen::Index CsvTable::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<Eigen::Index>(i);
  throw ParseError("missing column '" + name + "'", 0);
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing", 0);
  for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c ? "," : "") << columns[c];
  out << "\n";
  std::string line;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    line.clear();
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c) line += ',';
      line += double_to_string(data(r, c));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw ParseError("write failed for '" + path + "'", 0);
}

CsvTable CsvTable::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);

  CsvTable table;
  std::string line;
  long lineno = 0;
  bool have_header = false;
  std::vector<double> values;
  Eigen::Index n_cols = 0;
  Eigen::Index n_rows = 0;

  auto split_append = [&](const std::string& row) {
    std::size_t pos = 0;
    Eigen::Index count = 0;
    while (pos <= row.size()) {
      auto comma = row.find(',', pos);
      if (comma == std::string::npos) comma = row.size();
      double v = 0.0;
      const char* b = row.data() + pos;
      const char* e = row.data() + comma;
      const auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || ptr != e)
        throw ParseError("malformed number '" + row.substr(pos, comma - pos) + "'", lineno);
      values.push_back(v);
      ++count;
      pos = comma + 1;
    }
    if (count != n_cols)
      throw ParseError("expected " + std::to_string(n_cols) + " columns, got " +
                           std::to_string(count),
                       lineno);
    ++n_rows;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      const auto b = body.find_first_not_of(' ');
      if (b == std::string::npos) continue;
      body = body.substr(b);
      const auto eq = body.find('=');
      if (eq != std::string::npos)
        table.metadata[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (!have_header) {
      std::size_t pos = 0;
      while (pos <= line.size()) {
        auto comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        table.columns.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
      }
      n_cols = static_cast<Eigen::Index>(table.columns.size());
      if (n_cols == 0 || table.columns[0].empty())
        throw ParseError("malformed header", lineno);
      have_header = true;
      continue;
    }
    split_append(line);
  }
  if (!have_header) throw ParseError("empty file '" + path + "'", lineno);

  table.data.resize(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r)
    for (Eigen::Index c = 0; c < n_cols; ++c)
      table.data(r, c) = values[static_cast<std::size_t>(r * n_cols + c)];
  return table;
}

}  // namespace uficlab
