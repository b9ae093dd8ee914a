#pragma once

#include <string>

namespace fixprice {

/// Shortest "%.12g" rendering; inf/nan spelled out.
std::string format_real(double value);

/// Rounds to 12 significant digits so that JSON writers emit at most 12.
double round_significant(double value);

}  // namespace fixprice
