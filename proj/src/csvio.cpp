#include "notewatch/csvio.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "notewatch/common.hpp"

namespace notewatch::csvio {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

bool needs_quoting(const std::string& field) {
  for (const char c : field)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') return true;
  return false;
}

void append_field(std::string& out, const std::string& field) {
  if (!needs_quoting(field)) {
    out += field;
    return;
  }
  out += '"';
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    append_field(out, row[i]);
  }
  out += '\n';
}

}  // namespace

std::string to_string(const Table& t) {
  if (t.header.empty()) throw validation_error("csv table has no header");
  std::string out;
  append_row(out, t.header);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size())
      throw validation_error("csv row " + std::to_string(r + 1) + " has " +
                             std::to_string(t.rows[r].size()) + " fields, header has " +
                             std::to_string(t.header.size()));
    append_row(out, t.rows[r]);
  }
  return out;
}

void write_table(const std::string& path, const Table& t) {
  const std::string body = to_string(t);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw runtime_failure("cannot open for writing: " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw runtime_failure("write failed: " + path);
}

Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;

  auto end_field = [&]() {
    row.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&]() {
    end_field();
    records.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
        if (c == '\n') ++line;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted)
          throw validation_error("csv line " + std::to_string(line) +
                                 ": quote inside an unquoted field");
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;  // tolerate CRLF
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_was_quoted)
          throw validation_error("csv line " + std::to_string(line) +
                                 ": text after a closing quote");
        field += c;
    }
  }
  if (in_quotes) throw validation_error("csv: unterminated quote");
  // A final record without a trailing newline still counts.
  if (!field.empty() || field_was_quoted || !row.empty()) end_record();

  if (records.empty()) throw validation_error("csv: empty input");
  Table t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw validation_error("csv record " + std::to_string(r) + " has " +
                             std::to_string(records[r].size()) + " fields, header has " +
                             std::to_string(t.header.size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw runtime_failure("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw validation_error("csv: no column named '" + name + "'");
}

double parse_double(const std::string& field) {
  if (field.empty()) throw validation_error("csv: empty numeric field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size())
    throw validation_error("csv: not a number: '" + field + "'");
  return v;
}

}  // namespace notewatch::csvio
