#pragma once
// Minimal CSV table: comma separated, '.' decimal point, header row, LF endings.
// Doubles are written in shortest round-trip form so identical runs produce
// identical bytes.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "spinlaw/error.hpp"

namespace spinlaw {

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t v) { return std::to_string(v); }
inline std::string format_number(std::uint64_t v) { return std::to_string(v); }
inline std::string format_number(int v) { return std::to_string(v); }

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  template <class... Cells>
  void add(const Cells&... cells) {
    std::vector<std::string> row{cell(cells)...};
    detail::require(row.size() == header_.size(), "CsvTable: row width does not match header");
    rows_.push_back(std::move(row));
  }

  void write(std::ostream& os) const {
    write_row(os, header_);
    for (const auto& r : rows_) write_row(os, r);
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    detail::require(static_cast<bool>(f), "CsvTable: cannot open " + path);
    write(f);
  }

 private:
  static std::string cell(const std::string& s) {
    detail::require(s.find_first_of(",\n\r\"") == std::string::npos, "CsvTable: cell contains a delimiter: " + s);
    return s;
  }
  static std::string cell(const char* s) { return cell(std::string(s)); }
  template <class T>
  static std::string cell(const T& v) {
    return format_number(v);
  }

  static void write_row(std::ostream& os, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace spinlaw
