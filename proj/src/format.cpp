#include "fixprice/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace fixprice {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

double round_significant(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  return std::strtod(format_real(value).c_str(), nullptr);
}

}  // namespace fixprice
