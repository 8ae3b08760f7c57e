#pragma once

#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace krbn {

// Shortest round-trip decimal form; identical bytes for identical doubles.
// Non-finite values print as nan, inf, -inf.
std::string format_double(double x);

// Minimal CSV writer. Fields containing a comma, quote or newline are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> names);
  void header(const std::vector<std::string>& names);
  CsvWriter& field(std::string_view s);
  CsvWriter& field(const char* s) { return field(std::string_view(s)); }
  CsvWriter& field(const std::string& s) { return field(std::string_view(s)); }
  CsvWriter& field(double x);
  CsvWriter& field(long long x);
  CsvWriter& field(int x) { return field(static_cast<long long>(x)); }
  CsvWriter& field(std::size_t x) { return field(static_cast<long long>(x)); }
  void end_row();

 private:
  void sep();
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace krbn
