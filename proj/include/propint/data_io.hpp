#pragma once

#include <cstdlib>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>

#include "propint/types.hpp"

namespace propint {

/// Raised when a data file cannot be read or holds a non-binary token.
/// line is 1-based; 0 means the file itself was unreadable.
class IngestError : public std::runtime_error {
 public:
  IngestError(std::size_t line, const std::string& message)
      : std::runtime_error(message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const char* ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool parses_as_number(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace detail

/// Reads newline-delimited binary tokens ("0" or "1" after trimming; blank
/// lines ignored). A non-numeric first content line is treated as a
/// single-column CSV header and skipped. Returns the token count and mean.
inline SampleSummary ingest_stream(std::istream& in,
                                   const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  double count = 0.0;
  double ones = 0.0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string token = detail::trim(line);
    if (token.empty()) continue;
    const bool header_candidate = first_content_line;
    first_content_line = false;
    if (token == "0" || token == "1") {
      count += 1.0;
      ones += token == "1" ? 1.0 : 0.0;
      continue;
    }
    if (header_candidate && !detail::parses_as_number(token)) {
      continue;  // CSV header row
    }
    throw IngestError(line_no, source + ":" + std::to_string(line_no) +
                                   ": expected a binary token (0 or 1), got \"" +
                                   token + "\"");
  }
  if (count < 1.0) {
    throw IngestError(line_no, source + ": no binary data tokens found");
  }
  return SampleSummary::from_successes(count, ones);
}

inline SampleSummary ingest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IngestError(0, path + ": cannot open data file");
  }
  return ingest_stream(in, path);
}

}  // namespace propint
