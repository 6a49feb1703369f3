#pragma once

#include <string>

namespace glyphclust {

/// Fixed-point with the given number of decimals ("%.4f" style).
std::string fmt_fixed(double x, int decimals = 4);

/// Shortest representation that round-trips the double exactly.
std::string fmt_full(double x);

std::string xml_escape(const std::string& s);

}  // namespace glyphclust
