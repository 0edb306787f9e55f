#pragma once

#include <string>
#include <vector>

namespace nozzleflow {

// All writers emit LF line endings and 17-significant-digit floats, so a
// dump read back through strtod reproduces every double bit-exactly, and two
// runs of the same configuration produce byte-identical files.

std::string format_double(double v);

// Write via a temp file in the same directory plus rename.
void write_text_atomic(const std::string& path, const std::string& content);

void write_csv_atomic(const std::string& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows);

struct CsvTable {
  std::string header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

}  // namespace nozzleflow
