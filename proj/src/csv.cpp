#include "gpsinfer/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gpsinfer/errors.hpp"

namespace gpsinfer::csv {

namespace {

// Splits one logical CSV record starting at position `pos` of `text`.
// Returns the fields and advances `pos` past the record's line terminator.
// Quoted fields may contain commas, quotes ("" escape) and newlines.
std::vector<std::string> next_record(const std::string& text, std::size_t& pos, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;
  ok = true;
  while (pos < text.size()) {
    const char c = text[pos];
    saw_any = true;
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
        } else {
          in_quotes = false;
          ++pos;
        }
      } else {
        field.push_back(c);
        ++pos;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos;
    } else if (c == '\r') {
      ++pos;
      if (pos < text.size() && text[pos] == '\n') ++pos;
      fields.push_back(std::move(field));
      return fields;
    } else if (c == '\n') {
      ++pos;
      fields.push_back(std::move(field));
      return fields;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (in_quotes) ok = false;  // unterminated quote
  if (saw_any) fields.push_back(std::move(field));
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

}  // namespace

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  Table table;
  std::size_t pos = 0;
  bool header_done = false;
  std::size_t record_no = 0;
  while (pos < text.size()) {
    // Comment lines (e.g. the summary block of a balance report) are kept aside.
    if (text[pos] == '#') {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string line = text.substr(pos, eol - pos);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      table.comments.push_back(std::move(line));
      pos = eol + (eol < text.size() ? 1 : 0);
      continue;
    }
    bool ok = true;
    std::vector<std::string> fields = next_record(text, pos, ok);
    ++record_no;
    if (!ok) throw ParseError(path + ": unterminated quoted field in record " + std::to_string(record_no));
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (!header_done) {
      table.header = std::move(fields);
      header_done = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(path + ": row " + std::to_string(table.rows.size() + 1) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!header_done) throw ParseError(path + ": missing header row");
  return table;
}

std::string escape_field(const std::string& field) {
  bool needs = false;
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') { needs = true; break; }
  }
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_field(fields[i]);
  }
  out.push_back('\n');
  return out;
}

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
  const std::string t = trim(cell);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  const auto res = std::from_chars(first, last, value);
  if (t.empty() || res.ec != std::errc{} || res.ptr != last) {
    throw ParseError("row " + std::to_string(row) + ", column '" + column +
                     "': cannot parse '" + cell + "' as a number");
  }
  return value;
}

std::size_t column_index(const Table& table, const std::string& name) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return i;
  }
  throw MissingColumn("missing column: " + name);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace gpsinfer::csv
