#pragma once

#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fellap {

/// Shortest round-trippable-enough decimal used in every CSV cell.
inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

/// Quotes a cell when it holds a separator, quote or newline.
inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), width_(header.size()) {
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_cell(cells[i]);
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  std::size_t width_;
};

}  // namespace fellap
