#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "thstab/types.hpp"

namespace thstab::test {

inline Point<double> pt(std::initializer_list<double> xs) {
  Point<double> p(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) p[i++] = x;
  return p;
}

inline double rel_diff(double a, double b) {
  const double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

}  // namespace thstab::test
