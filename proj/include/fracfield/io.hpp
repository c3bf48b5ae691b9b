#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "fracfield/errors.hpp"

namespace fracfield {

/// Round-trippable decimal form: 17 significant digits.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV file with a header row; LF line endings regardless of platform.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<std::string> header)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ValidationError("cannot open '" + path + "' for writing");
    std::string line;
    for (const auto& h : header) {
      if (!line.empty()) line += ',';
      line += h;
    }
    out_ << line << '\n';
  }

  /// Cells are either preformatted strings or doubles.
  class Row {
   public:
    explicit Row(CsvWriter& w) : w_(w) {}
    Row& operator<<(double v) { return add(format_double(v)); }
    Row& operator<<(const std::string& s) { return add(s); }
    Row& operator<<(const char* s) { return add(s); }
    Row& operator<<(std::size_t v) { return add(std::to_string(v)); }
    Row& operator<<(int v) { return add(std::to_string(v)); }
    ~Row() { w_.out_ << line_ << '\n'; }

   private:
    Row& add(const std::string& s) {
      if (cells_++ > 0) line_ += ',';
      line_ += s;
      return *this;
    }
    CsvWriter& w_;
    std::string line_;
    std::size_t cells_ = 0;
  };

  Row row() { return Row(*this); }

 private:
  std::ofstream out_;
};

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Comma separated reals, e.g. "0.5,0.25".
inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(',', pos);
    const std::string cell = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (!cell.empty()) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size()) throw ValidationError("not a number: '" + cell + "'");
      out.push_back(v);
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace fracfield
