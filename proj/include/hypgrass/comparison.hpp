#pragma once

#include <algorithm>
#include <cmath>

#include "hypgrass/space.hpp"

namespace hypgrass {

// Euclidean comparison angle at x for the triangle (x, y, z).
inline double comparison_angle(const Point& x, const Point& y, const Point& z, const Tolerance& tol = {}) {
  const double a = distance(x, y, tol), b = distance(x, z, tol), c = distance(y, z, tol);
  if (a <= tol.same_point || b <= tol.same_point)
    throw InvalidArgument("comparison_angle: vertex coincides with an endpoint");
  const double r = (a * a + b * b - c * c) / (2.0 * a * b);
  return std::acos(std::clamp(r, -1.0, 1.0));
}

// Same, from the three side lengths.
inline double comparison_angle_from_sides(double a, double b, double c) {
  if (a <= 0 || b <= 0) throw InvalidArgument("comparison_angle: degenerate side");
  return std::acos(std::clamp((a * a + b * b - c * c) / (2.0 * a * b), -1.0, 1.0));
}

}  // namespace hypgrass
