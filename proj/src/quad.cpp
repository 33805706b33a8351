#include "ipmgnn/quad.hpp"

#include <algorithm>
#include <cmath>

namespace ipmgnn {

double quad_root(double a, double b, double c, double cap) {
  if (!(c > 0.0)) c = 0.0;
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return cap;
  const bool linear = std::abs(a) <= 1e-14 * scale;

  if (c == 0.0) {
    // q(t) = t (a t + b)
    if (b > 0.0) return (linear || a >= 0.0) ? cap : std::min(cap, -b / a);
    if (b < 0.0) return 0.0;
    return a >= 0.0 ? cap : 0.0;
  }
  if (linear) {
    if (std::abs(b) <= 1e-14 * scale || b >= 0.0) return cap;
    return std::min(cap, -c / b);
  }
  const double disc = b * b - 4.0 * a * c;
  // With c > 0 a non-positive discriminant implies a > 0: no sign change.
  if (disc <= 0.0) return cap;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  const double r1 = q / a;
  const double r2 = c / q;
  double root = cap;
  if (r1 > 0.0) root = std::min(root, r1);
  if (r2 > 0.0) root = std::min(root, r2);
  return root;
}

}  // namespace ipmgnn
