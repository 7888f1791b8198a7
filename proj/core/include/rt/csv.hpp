#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace rt {

using CsvValue = std::variant<double, long long, std::string>;

// Formats a double as fixed 17-significant-digit scientific notation so that
// repeated runs produce diffable, byte-identical files.
std::string format_sci(double v);

// Deterministic CSV emitter: fixed column order, '\n' line endings, one header
// row. Tracks whether any NaN was written (callers surface that as a failure
// exit code).
class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path, std::vector<std::string> header);
  ~CsvWriter();

  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<CsvValue>& values);
  void close();  // flush to disk; implicit in the destructor

  bool nan_seen() const { return nan_seen_; }

 private:
  std::filesystem::path path_;
  std::string buffer_;
  size_t columns_ = 0;
  bool closed_ = false;
  bool nan_seen_ = false;
};

}  // namespace rt
