#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace xmeval {

// Minimal CSV support: comma (or custom) delimiter, double-quote quoting with
// "" escapes, no multi-line fields. Good enough for id/score tables.

std::vector<std::string> split_csv_line(const std::string& line, char delim = ',');

// Reads all rows; skips a trailing empty line. Throws ParseError on quoting
// errors, annotated with the path and 1-based line number.
std::vector<std::vector<std::string>> read_delimited_file(const std::string& path,
                                                          char delim = ',');

std::string csv_escape(const std::string& field);

// Fixed-point rendering used for every numeric cell the tool emits, so a given
// (value, precision) pair always maps to the same bytes.
std::string format_fixed(double value, int precision);

// Strict double parser: rejects empty, trailing junk, and NaN.
double parse_double_strict(const std::string& text, const std::string& context);

}  // namespace xmeval
