#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlmimo {

/// Row-oriented result table with a fixed column order.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  /// Value of `column` in row `r`; throws if the column is unknown.
  const std::string& at(std::size_t r, const std::string& column) const;
};

/// %.10g by default; infinities render as "inf"/"-inf", NaN as "nan".
std::string format_number(double v);
std::string format_number(double v, int precision);

/// RFC 4180 CSV with a header row and '\n' line endings.
void write_csv(std::ostream& os, const Table& table);
/// Array of objects; cells that parse as finite numbers become JSON numbers.
void write_json(std::ostream& os, const Table& table);

void write_table(std::ostream& os, const Table& table, const std::string& format);

/// Parser for files produced by write_csv (quoted fields supported).
Table read_csv(std::istream& is);

}  // namespace nlmimo
