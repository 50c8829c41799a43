#include "riskdiv/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "riskdiv/error.hpp"

namespace riskdiv {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, std::initializer_list<std::string> header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()), path_(path) {
  if (!out_) throw Error(ErrorCode::ValidationError, "cannot write " + path);
  bool first = true;
  for (const std::string& h : header) {
    if (!first) out_ << ',';
    out_ << h;
    first = false;
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw Error(ErrorCode::InvariantViolation, "CSV row width mismatch in " + path_);
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw Error(ErrorCode::ValidationError, "failed writing " + path_);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::ValidationError, "cannot write " + path);
  out << j.dump(2) << '\n';
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::ValidationError, "cannot create " + dir + ": " + ec.message());
}

}  // namespace riskdiv
