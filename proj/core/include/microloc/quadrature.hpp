// Small quadrature toolkit: composite Gauss-Legendre panels with doubling,
// and midpoint-reusing trapezoid doubling for periodic integrands. Both
// return an error estimate (difference of the last two refinement levels).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <type_traits>
#include <utility>

#include "microloc/common.hpp"

namespace microloc::quad {

// 16-point Gauss-Legendre rule on [-1, 1] (positive half; nodes symmetric).
inline constexpr std::array<double, 8> kGl16Nodes = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr std::array<double, 8> kGl16Weights = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

template <class F>
using value_t = std::invoke_result_t<F&, double>;

template <class T>
struct Result {
  T value{};
  double error = 0.0;   // |last refinement change|
  bool converged = false;
  std::int64_t evaluations = 0;
};

// One 16-point panel on [a, b].
template <class F>
value_t<F> gl16_panel(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  value_t<F> acc{};
  for (std::size_t i = 0; i < kGl16Nodes.size(); ++i) {
    const double dx = half * kGl16Nodes[i];
    acc += kGl16Weights[i] * (f(mid + dx) + f(mid - dx));
  }
  return acc * half;
}

// Composite 16-point rule with `panels` equal subdivisions of [a, b].
template <class F>
value_t<F> gl16_composite(F&& f, double a, double b, int panels) {
  value_t<F> acc{};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    acc += gl16_panel(f, a + p * h, a + (p + 1) * h);
  }
  return acc;
}

// Panel-doubling Gauss-Legendre: refine until the change between successive
// levels drops below tol_rel·|value| + tol_abs, or max_panels is exceeded.
template <class F>
Result<value_t<F>> adaptive_gl(F&& f, double a, double b, double tol_rel,
                               double tol_abs, int start_panels = 1,
                               int max_panels = 1 << 16) {
  Result<value_t<F>> out;
  int panels = start_panels;
  value_t<F> prev = gl16_composite(f, a, b, panels);
  out.evaluations = 16L * panels;
  while (panels < max_panels) {
    panels *= 2;
    const value_t<F> cur = gl16_composite(f, a, b, panels);
    out.evaluations += 16L * panels;
    const double change = std::abs(cur - prev);
    out.value = cur;
    out.error = change;
    if (change <= tol_rel * std::abs(cur) + tol_abs) {
      out.converged = true;
      return out;
    }
    prev = cur;
  }
  out.value = prev;
  out.converged = false;
  return out;
}

// Trapezoid rule with interval doubling, reusing prior evaluations. For
// periodic integrands over a full period this converges spectrally.
template <class F>
Result<value_t<F>> trapezoid_doubling(F&& f, double a, double b,
                                      double tol_rel, double tol_abs,
                                      std::int64_t start_panels = 16,
                                      std::int64_t max_panels = 1 << 20) {
  Result<value_t<F>> out;
  std::int64_t n = start_panels;
  double h = (b - a) / static_cast<double>(n);
  value_t<F> sum{};
  // Periodic convention: sample n points, each with weight h (f(a) == f(b)).
  for (std::int64_t i = 0; i < n; ++i) {
    sum += f(a + static_cast<double>(i) * h);
  }
  value_t<F> prev = sum * h;
  out.evaluations = n;
  while (n < max_panels) {
    // Add midpoints of the current panels.
    value_t<F> mids{};
    for (std::int64_t i = 0; i < n; ++i) {
      mids += f(a + (static_cast<double>(i) + 0.5) * h);
    }
    out.evaluations += n;
    n *= 2;
    h *= 0.5;
    sum += mids;
    const value_t<F> cur = sum * h;
    const double change = std::abs(cur - prev);
    out.value = cur;
    out.error = change;
    if (change <= tol_rel * std::abs(cur) + tol_abs) {
      out.converged = true;
      return out;
    }
    prev = cur;
  }
  out.value = prev;
  out.converged = false;
  return out;
}

}  // namespace microloc::quad
