#include "rt/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rt {

std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

CsvWriter::CsvWriter(std::filesystem::path path, std::vector<std::string> header)
    : path_(std::move(path)), columns_(header.size()) {
  if (header.empty()) throw std::invalid_argument("CsvWriter: empty header");
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
  }
}

void CsvWriter::row(const std::vector<CsvValue>& values) {
  if (values.size() != columns_) throw std::invalid_argument("CsvWriter: column count mismatch");
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    if (const auto* d = std::get_if<double>(&values[i])) {
      if (std::isnan(*d)) nan_seen_ = true;
      buffer_ += format_sci(*d);
    } else if (const auto* n = std::get_if<long long>(&values[i])) {
      buffer_ += std::to_string(*n);
    } else {
      buffer_ += std::get<std::string>(values[i]);
    }
  }
  buffer_ += '\n';
}

void CsvWriter::close() {
  if (closed_) return;
  closed_ = true;
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw std::runtime_error("CsvWriter: cannot open " + path_.string());
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out) throw std::runtime_error("CsvWriter: write failed for " + path_.string());
}

}  // namespace rt
