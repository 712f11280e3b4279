#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace past::csv {

/// Shortest round-trip decimal representation ('.' separator, "nan"/"inf" for
/// non-finite values).
std::string format_double(double v);

/// Parses a decimal number; throws InvalidArgument on trailing garbage.
double parse_double(std::string_view s);

/// Splits one line on commas. Quoted cells are not supported; the formats
/// written by this project never need them.
std::vector<std::string> split_row(std::string_view line);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace past::csv
