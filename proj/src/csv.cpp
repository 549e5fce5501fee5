#include "e2h/csv.hpp"

#include <charconv>
#include <cmath>

namespace e2h {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, std::vector<std::string> header) : os_(&os), columns_(header.size()) {
  std::string line;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) line.push_back(',');
    line += header[i];
  }
  line.push_back('\n');
  os_->write(line.data(), static_cast<std::streamsize>(line.size()));
}

}  // namespace e2h
