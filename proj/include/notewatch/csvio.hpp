#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace notewatch::csvio {

// Shortest decimal string that parses back to the exact same double.
// Infinities render as "inf"/"-inf", NaN as "nan".
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // every row matches the header width

  std::size_t cols() const { return header.size(); }
};

// RFC-4180 quoting: fields holding a comma, quote, CR or LF are wrapped in
// double quotes with embedded quotes doubled. Rows end with '\n' and the
// file ends with one. A ragged row is fatal.
std::string to_string(const Table& t);
void write_table(const std::string& path, const Table& t);

// Parses what to_string emits; also accepts CRLF line ends. Fatal on a
// ragged row, an unterminated quote, or text after a closing quote.
Table parse_csv(const std::string& text);
Table read_table(const std::string& path);

// Index of the named column; fatal when the header lacks it.
std::size_t column(const Table& t, const std::string& name);

// strtod over the full field; fatal on trailing garbage or an empty field.
double parse_double(const std::string& field);

}  // namespace notewatch::csvio
