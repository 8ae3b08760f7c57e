#include "krbn/csv.hpp"

#include <charconv>
#include <cmath>

namespace krbn {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
  for (auto n : names) field(n);
  end_row();
}

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) field(std::string_view(n));
  end_row();
}

CsvWriter& CsvWriter::field(std::string_view s) {
  sep();
  if (s.find_first_of(",\"\n") == std::string_view::npos) {
    out_ << s;
    return *this;
  }
  out_ << '"';
  for (char c : s) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

CsvWriter& CsvWriter::field(double x) {
  sep();
  out_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::field(long long x) {
  sep();
  out_ << x;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

}  // namespace krbn
