#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace e2h {

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// Comma-separated writer with a mandatory header and LF line endings.
/// Output is independent of the global locale.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> header);

  template <class... Ts>
  void row(const Ts&... fields) {
    std::string line;
    std::size_t i = 0;
    ((append(line, fields, i++)), ...);
    line.push_back('\n');
    os_->write(line.data(), static_cast<std::streamsize>(line.size()));
  }

  std::size_t columns() const { return columns_; }

 private:
  static void sep(std::string& line, std::size_t i) {
    if (i > 0) line.push_back(',');
  }
  static void append(std::string& line, double v, std::size_t i) {
    sep(line, i);
    line += format_double(v);
  }
  static void append(std::string& line, bool v, std::size_t i) {
    sep(line, i);
    line += v ? "true" : "false";
  }
  static void append(std::string& line, std::string_view v, std::size_t i) {
    sep(line, i);
    line += v;
  }
  static void append(std::string& line, const std::string& v, std::size_t i) { append(line, std::string_view(v), i); }
  static void append(std::string& line, const char* v, std::size_t i) { append(line, std::string_view(v), i); }
  template <class T>
    requires(std::is_integral_v<T> && !std::is_same_v<T, bool>)
  static void append(std::string& line, T v, std::size_t i) {
    sep(line, i);
    line += std::to_string(v);
  }

  std::ostream* os_;
  std::size_t columns_;
};

}  // namespace e2h
