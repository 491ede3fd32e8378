// Radial dispersion relations P(|ξ|): closed-form derivatives, inverse group
// velocity, an asymptotic-exponent checker, and the admissible window-exponent
// bounds used by the modified truncation symbol.
#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "microloc/common.hpp"

namespace microloc {

enum class ModelKind {
  fractional,        // P'(rho) = rho^p
  gravity_ww,        // fractional with p = -1/2
  capillary_ww,      // fractional with p = 1/2
  gravity_ww_depth,  // P(rho) = rho^{1/2} tanh(h rho)
  capillary_ww_depth,// P(rho) = rho^{3/2} tanh(h rho)
  half_klein_gordon, // P(rho) = sqrt(1 + rho^2)
  schrodinger,       // fractional with p = 1
  custom,
};

struct DispersionModel {
  ModelKind kind = ModelKind::schrodinger;
  double p = 1.0;  // fractional exponent, meaningful for fractional kinds
  double h = 1.0;  // depth, meaningful for the *_depth kinds

  // Asymptotics of the group velocity: |P'(rho) - P0| ~ rho^{p0} as rho -> 0
  // and |P'(rho) - P1| ~ rho^{p1} as rho -> infinity.
  double p0 = 1.0;
  double P0 = 0.0;
  double p1 = 1.0;
  double P1 = 0.0;
  int convexity = +1;  // sign of P'' on ]0, infinity[

  // Only used by ModelKind::custom: (rho, order) -> d^order P / d rho^order.
  std::function<double(double, int)> custom_eval;

  static DispersionModel fractional(double p);
  static DispersionModel schrodinger();
  static DispersionModel gravity_ww();
  static DispersionModel capillary_ww();
  static DispersionModel gravity_ww_depth(double h);
  static DispersionModel capillary_ww_depth(double h);
  static DispersionModel half_klein_gordon();
  static DispersionModel custom(std::function<double(double, int)> eval,
                                double p0, double P0, double p1, double P1,
                                int convexity);

  // Accepts "schrodinger", "gravity-ww", "capillary-ww", "gravity-ww-h",
  // "capillary-ww-h", "half-kg", "fractional:<p>". `depth` feeds the -h kinds.
  static DispersionModel from_id(const std::string& id, double depth = 1.0);
  std::string id() const;
};

// d^order P / d rho^order at rho > 0, order in {0, 1, 2}, all closed-form.
double eval_derivatives(const DispersionModel& model, double rho, int order);

// The unique rho with P'(rho) = r, or +infinity when r lies outside the
// closure of the range of P' on the unbounded side. Closed form where one
// exists, bisection otherwise. Requires strictly monotone P'.
double invert_velocity(const DispersionModel& model, double r);

struct RatioBand {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
};

struct HypothesisReport {
  bool pass = false;
  bool monotone = false;                 // P' strictly monotone, direction = convexity
  bool curvature_sign_constant = false;  // convexity * P'' > 0 pointwise
  RatioBand low_velocity;    // |P' - P0| / rho^{p0} on the low third of the grid
  RatioBand low_curvature;   // |P''| / rho^{p0 - 1} on the low third
  RatioBand high_velocity;   // |P' - P1| / rho^{p1} on the high third
  RatioBand high_curvature;  // |P''| / rho^{p1 - 1} on the high third
  double band_lo = 0.05;     // accepted ratio window
  double band_hi = 20.0;
  double offending_rho = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

// Checks positivity and monotonicity of P', the constant sign of P'', and
// that the asymptotic ratios stay inside [band_lo, band_hi] on the outer
// thirds of the (log-spaced, ascending) grid covering at least [1e-3, 1e3].
HypothesisReport verify_hypothesis(const DispersionModel& model,
                                   std::span<const double> rho_grid);

struct EpsilonBounds {
  double eps0_max = 0.0;  // low-frequency window exponent must stay below this
  double eps1_max = 0.0;  // high-frequency window exponent bound, may be +inf
};

// Admissible exponent ranges for the modified symbol's frequency windows.
// Requires the mixed-decay regime p1 < 0 < p0.
EpsilonBounds epsilon_bounds(const DispersionModel& model);

// count log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace microloc
