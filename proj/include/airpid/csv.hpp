#ifndef AIRPID_CSV_HPP_
#define AIRPID_CSV_HPP_

#include <fstream>
#include <string>
#include <vector>

namespace airpid::io {

// Shortest round-trip formatting; "inf"/"nan" spelled out so sentinel
// metric values survive a CSV round trip.
std::string fmt_double(double v);

double parse_double(const std::string& s);

// CSV with a schema line ("# schema: <tag>") ahead of the column header.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& schema,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);
  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
  std::size_t width_;
};

struct CsvFile {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// Rejects files whose schema line is missing or does not equal
// expected_schema. On row-level errors, *error names the offending line.
bool read_csv(const std::string& path, const std::string& expected_schema,
              CsvFile& out, std::string* error);

}  // namespace airpid::io

#endif  // AIRPID_CSV_HPP_
