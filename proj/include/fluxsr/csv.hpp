#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "fluxsr/common.hpp"

namespace fluxsr::csv {

// Shortest round-trip-safe text with 17 significant digits, '.' decimal.
inline std::string format(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

class Writer {
 public:
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    write_fields(header);
  }

  template <class... T>
  void row(const T&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << text(fields), first = false), ...);
    out_ << '\n';
  }

  void row(const std::vector<double>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << format(fields[i]);
    out_ << '\n';
  }

  ~Writer() = default;

 private:
  static std::string text(double v) { return format(v); }
  static std::string text(int v) { return std::to_string(v); }
  static std::string text(long v) { return std::to_string(v); }
  static std::string text(unsigned long v) { return std::to_string(v); }
  static std::string text(unsigned long long v) { return std::to_string(v); }
  static std::string text(const std::string& v) { return v; }
  static std::string text(const char* v) { return v; }

  void write_fields(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
    out_ << '\n';
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace fluxsr::csv
