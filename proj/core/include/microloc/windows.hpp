// Smooth cutoff shapes shared by data synthesis and symbol construction.
#pragma once

#include <cmath>

namespace microloc {

// Canonical C_c^infinity bump: peak value 1 at s = 0, support [-1, 1].
inline double smooth_bump(double s) {
  const double s2 = s * s;
  if (s2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s2));
}

// Smooth plateau: identically 1 for |s| <= 1/2, identically 0 for |s| >= 1,
// monotone in between (standard exp(-1/u) partition construction).
inline double plateau_window(double s) {
  const double a = std::abs(s);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  const double u = 2.0 * (a - 0.5);  // transition coordinate in ]0, 1[
  const double f_u = std::exp(-1.0 / u);
  const double f_cu = std::exp(-1.0 / (1.0 - u));
  return f_cu / (f_u + f_cu);
}

// Unit-height gaussian profile in the scaled variable.
inline double gaussian_window(double s) { return std::exp(-0.5 * s * s); }

}  // namespace microloc
