#pragma once

// Minimal RFC-4180-style CSV support shared by the file interfaces: comma
// separated, double-quote quoting with "" escapes, header row required, UTF-8
// passed through verbatim, "." decimal point (locale independent).

#include <cstddef>
#include <string>
#include <vector>

namespace gpsinfer::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Lines beginning with '#' (outside quotes) are retained here, not parsed.
  std::vector<std::string> comments;
};

// Parses a whole file. Throws IoError if unreadable, ParseError on malformed
// quoting or ragged rows (every row must match the header width).
Table read_file(const std::string& path);

// Quotes a field only when needed (comma, quote, CR or LF present).
std::string escape_field(const std::string& field);

std::string format_row(const std::vector<std::string>& fields);

// Locale-independent, shortest round-trip formatting of a double ("nan"/"inf"
// spelled out). Used everywhere a number is written so outputs are byte-stable.
std::string format_double(double value);

// Strict double parser (whole trimmed cell must parse). Throws ParseError with
// the 1 based data row number and column name in the message.
double parse_double(const std::string& cell, std::size_t row, const std::string& column);

// Column lookup in a header. Throws MissingColumn.
std::size_t column_index(const Table& table, const std::string& name);

void write_file(const std::string& path, const std::string& content);

}  // namespace gpsinfer::csv
