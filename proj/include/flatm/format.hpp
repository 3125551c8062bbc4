#pragma once

#include <string>

namespace flatm {

// Shortest-free, locale-independent "%.17g"; infinities as "inf"/"-inf".
std::string format_double(double value);

// Inverse of format_double. Throws std::invalid_argument on bad input.
double parse_double(const std::string& text);

}  // namespace flatm
