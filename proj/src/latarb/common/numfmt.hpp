#pragma once

#include <string>

namespace latarb {

// Shortest round-trip representation; NaN formats as an empty string.
std::string format_double(double value);

// Strict parse of a full string; empty input yields NaN.
double parse_double(const std::string& text);

}  // namespace latarb
