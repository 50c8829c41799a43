#pragma once

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace riskdiv {

// Shortest-safe round-trip text for a double (%.17g); non-finite values as inf/-inf/nan.
std::string format_number(double v);

// Comma-separated rows with a fixed header. Fields are written verbatim, so
// callers must not pass text containing commas or newlines.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<std::string> header);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  size_t columns_;
  std::string path_;
};

void write_json(const std::string& path, const nlohmann::json& j);

// Creates the directory (and parents) when missing.
void ensure_directory(const std::string& dir);

}  // namespace riskdiv
