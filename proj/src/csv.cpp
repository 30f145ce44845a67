#include "nlmimo/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <stdexcept>

namespace nlmimo {

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("row width does not match header");
  rows.push_back(std::move(row));
}

const std::string& Table::at(std::size_t r, const std::string& column) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == column) return rows.at(r).at(c);
  }
  throw std::out_of_range("no column '" + column + "'");
}

std::string format_number(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string format_number(double v) { return format_number(v, 10); }

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_line(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << quote(cells[i]);
  }
  os << '\n';
}

bool as_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  return r.ec == std::errc() && r.ptr == end && std::isfinite(v);
}

}  // namespace

void write_csv(std::ostream& os, const Table& table) {
  write_line(os, table.header);
  for (const auto& row : table.rows) write_line(os, row);
}

void write_json(std::ostream& os, const Table& table) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      double v = 0.0;
      if (as_number(row[c], v)) {
        obj[table.header[c]] = v;
      } else {
        obj[table.header[c]] = row[c];
      }
    }
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << '\n';
}

void write_table(std::ostream& os, const Table& table, const std::string& format) {
  if (format == "csv") {
    write_csv(os, table);
  } else if (format == "json") {
    write_json(os, table);
  } else {
    throw std::invalid_argument("unknown output format '" + format + "'");
  }
}

Table read_csv(std::istream& is) {
  Table t;
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> cur;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cur.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      cur.push_back(std::move(field));
      field.clear();
      lines.push_back(std::move(cur));
      cur.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (any) {
    cur.push_back(std::move(field));
    lines.push_back(std::move(cur));
  }
  if (lines.empty()) return t;
  t.header = lines.front();
  for (std::size_t i = 1; i < lines.size(); ++i) t.add_row(std::move(lines[i]));
  return t;
}

}  // namespace nlmimo
