#pragma once

#include <string>
#include <vector>

namespace capmsize {

// Shortest decimal string that round-trips to the same double; used by every
// CSV writer so reruns produce byte-identical files.
std::string format_double(double value);

// Comma split with surrounding-whitespace trim; no quoting support (none of
// the handled layouts quote fields).
std::vector<std::string> split_csv_line(const std::string& line);

// Strict full-string parses returning false on junk instead of throwing.
bool parse_double_strict(const std::string& text, double* out);
bool parse_int_strict(const std::string& text, long* out);

}  // namespace capmsize
