// Ordinary least-squares line fit, used for slope extraction from log-log
// decay data.
#pragma once

#include <cstddef>
#include <span>

#include "microloc/common.hpp"

namespace microloc {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    fail(ErrorKind::usage, "line fit needs at least two matched samples");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) {
    fail(ErrorKind::numeric, "line fit is degenerate: all abscissas equal");
  }
  LineFit out;
  out.slope = (n * sxy - sx * sy) / denom;
  out.intercept = (sy - out.slope * sx) / n;
  return out;
}

}  // namespace microloc
