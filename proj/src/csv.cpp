#include "airpid/csv.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace airpid::io {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad number: " + s);
  return v;
}

namespace {
std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) line += ',';
    line += cells[i];
  }
  return line;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}
}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::trunc), width_(columns.size()) {
  out_ << "# schema: " << schema << "\n";
  out_ << join(columns) << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) {
    throw std::logic_error("csv row width mismatch");
  }
  out_ << join(cells) << "\n";
}

bool read_csv(const std::string& path, const std::string& expected_schema,
              CsvFile& out, std::string* error) {
  std::ifstream f(path);
  if (!f) {
    if (error) *error = "cannot open " + path;
    return false;
  }
  std::string line;
  if (!std::getline(f, line) || line.rfind("# schema: ", 0) != 0) {
    if (error) *error = path + ": missing schema line";
    return false;
  }
  out.schema = line.substr(10);
  if (out.schema != expected_schema) {
    if (error) {
      *error = path + ": unknown schema '" + out.schema + "', expected '" +
               expected_schema + "'";
    }
    return false;
  }
  if (!std::getline(f, line)) {
    if (error) *error = path + ": missing column header";
    return false;
  }
  out.columns = split(line);
  out.rows.clear();
  std::size_t lineno = 2;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != out.columns.size()) {
      if (error) {
        *error = path + ": line " + std::to_string(lineno) +
                 " has " + std::to_string(cells.size()) + " cells, expected " +
                 std::to_string(out.columns.size());
      }
      return false;
    }
    out.rows.push_back(std::move(cells));
  }
  return true;
}

}  // namespace airpid::io
