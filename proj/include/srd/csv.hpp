#pragma once

// CSV artifacts: one header row, fixed column order, numbers written with
// 17 significant digits so every double round-trips exactly.

#include <iosfwd>
#include <string>
#include <vector>

namespace srd::csv {

/// %.17g, with "inf", "-inf" and "nan" for non-finite values.
std::string number(double v);
/// Inverse of number().
double parse_number(const std::string& field);

class Writer {
 public:
  Writer(std::ostream& os, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  std::size_t columns() const noexcept { return columns_; }

 private:
  void emit(const std::vector<std::string>& fields);
  std::ostream& os_;
  std::size_t columns_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Parses what Writer emits (RFC 4180 quoting, no embedded newlines).
Table read(std::istream& is);

}  // namespace srd::csv
