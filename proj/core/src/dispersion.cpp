#include "microloc/dispersion.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace microloc {

namespace {

// P(rho) = rho^{p+1}/(p+1), so P' = rho^p exactly.
double fractional_eval(double p, double rho, int order) {
  switch (order) {
    case 0:
      if (p == -1.0) {
        fail(ErrorKind::domain,
             "fractional model with p = -1 has no power-law antiderivative");
      }
      return std::pow(rho, p + 1.0) / (p + 1.0);
    case 1:
      return std::pow(rho, p);
    default:
      return p * std::pow(rho, p - 1.0);
  }
}

// P(rho) = rho^ex * tanh(h rho) for the finite-depth kinds (ex = 1/2, 3/2).
double depth_eval(double ex, double h, double rho, int order) {
  const double t = std::tanh(h * rho);
  const double s = 1.0 - t * t;  // sech^2
  switch (order) {
    case 0:
      return std::pow(rho, ex) * t;
    case 1:
      return ex * std::pow(rho, ex - 1.0) * t + h * std::pow(rho, ex) * s;
    default:
      return ex * (ex - 1.0) * std::pow(rho, ex - 2.0) * t +
             2.0 * ex * h * std::pow(rho, ex - 1.0) * s -
             2.0 * h * h * std::pow(rho, ex) * s * t;
  }
}

double half_kg_eval(double rho, int order) {
  const double br = japanese_bracket(rho);
  switch (order) {
    case 0:
      return br;
    case 1:
      return rho / br;
    default:
      return 1.0 / (br * br * br);
  }
}

// Expanding-bracket bisection for monotone P'. Returns the boundary value
// (0 or +inf) when r falls outside the observed range of P'.
double bisect_inverse(const DispersionModel& model, double r) {
  const bool increasing = model.convexity > 0;
  const auto velocity = [&](double rho) {
    return eval_derivatives(model, rho, 1);
  };
  const double inf = std::numeric_limits<double>::infinity();
  double lo = 1.0;
  double hi = 1.0;
  // Probe outward until [lo, hi] brackets r; 600 halvings/doublings span
  // every representable positive scale.
  for (int i = 0; (increasing ? velocity(lo) > r : velocity(lo) < r); ++i) {
    if (i >= 600) return 0.0;
    lo *= 0.5;
  }
  for (int i = 0; (increasing ? velocity(hi) < r : velocity(hi) > r); ++i) {
    if (i >= 600) return inf;
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((velocity(mid) < r) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * hi) break;
  }
  return 0.5 * (lo + hi);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

DispersionModel DispersionModel::fractional(double p) {
  if (p == 0.0 || p == -1.0) {
    fail(ErrorKind::usage,
         "fractional exponent p must differ from 0 (flat group velocity) "
         "and -1 (logarithmic dispersion)");
  }
  DispersionModel m;
  m.kind = ModelKind::fractional;
  m.p = p;
  m.p0 = p;
  m.p1 = p;
  m.P0 = 0.0;
  m.P1 = 0.0;
  m.convexity = p > 0 ? +1 : -1;
  return m;
}

DispersionModel DispersionModel::schrodinger() {
  DispersionModel m = fractional(1.0);
  m.kind = ModelKind::schrodinger;
  return m;
}

DispersionModel DispersionModel::gravity_ww() {
  DispersionModel m = fractional(-0.5);
  m.kind = ModelKind::gravity_ww;
  return m;
}

DispersionModel DispersionModel::capillary_ww() {
  DispersionModel m = fractional(0.5);
  m.kind = ModelKind::capillary_ww;
  return m;
}

DispersionModel DispersionModel::gravity_ww_depth(double h) {
  if (!(h > 0.0)) fail(ErrorKind::usage, "depth h must be positive");
  DispersionModel m;
  m.kind = ModelKind::gravity_ww_depth;
  m.h = h;
  m.p0 = 0.5;
  m.p1 = -0.5;
  m.P0 = 0.0;
  m.P1 = 0.0;
  // Asymptotically concave; P'' actually changes sign near rho ~ 1/h, which
  // verify_hypothesis reports.
  m.convexity = -1;
  return m;
}

DispersionModel DispersionModel::capillary_ww_depth(double h) {
  if (!(h > 0.0)) fail(ErrorKind::usage, "depth h must be positive");
  DispersionModel m;
  m.kind = ModelKind::capillary_ww_depth;
  m.h = h;
  m.p0 = 1.5;
  m.p1 = 0.5;
  m.P0 = 0.0;
  m.P1 = 0.0;
  m.convexity = +1;
  return m;
}

DispersionModel DispersionModel::half_klein_gordon() {
  DispersionModel m;
  m.kind = ModelKind::half_klein_gordon;
  m.p0 = 1.0;
  m.P0 = 0.0;
  m.p1 = -2.0;
  m.P1 = 1.0;
  m.convexity = +1;
  return m;
}

DispersionModel DispersionModel::custom(std::function<double(double, int)> eval,
                                        double p0, double P0, double p1,
                                        double P1, int convexity) {
  if (convexity != 1 && convexity != -1) {
    fail(ErrorKind::usage, "convexity must be +1 or -1");
  }
  DispersionModel m;
  m.kind = ModelKind::custom;
  m.custom_eval = std::move(eval);
  m.p0 = p0;
  m.P0 = P0;
  m.p1 = p1;
  m.P1 = P1;
  m.convexity = convexity;
  return m;
}

DispersionModel DispersionModel::from_id(const std::string& id, double depth) {
  if (id == "schrodinger") return schrodinger();
  if (id == "gravity-ww") return gravity_ww();
  if (id == "capillary-ww") return capillary_ww();
  if (id == "gravity-ww-h") return gravity_ww_depth(depth);
  if (id == "capillary-ww-h") return capillary_ww_depth(depth);
  if (id == "half-kg") return half_klein_gordon();
  constexpr const char* kPrefix = "fractional:";
  if (id.rfind(kPrefix, 0) == 0) {
    const std::string arg = id.substr(std::string(kPrefix).size());
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(arg, &used);
    } catch (const std::exception&) {
      fail(ErrorKind::usage, "cannot parse fractional exponent in '" + id + "'");
    }
    if (used != arg.size()) {
      fail(ErrorKind::usage, "cannot parse fractional exponent in '" + id + "'");
    }
    return fractional(p);
  }
  fail(ErrorKind::usage, "unknown dispersion model id '" + id + "'");
}

std::string DispersionModel::id() const {
  switch (kind) {
    case ModelKind::fractional:
      return "fractional:" + format_double(p);
    case ModelKind::gravity_ww:
      return "gravity-ww";
    case ModelKind::capillary_ww:
      return "capillary-ww";
    case ModelKind::gravity_ww_depth:
      return "gravity-ww-h";
    case ModelKind::capillary_ww_depth:
      return "capillary-ww-h";
    case ModelKind::half_klein_gordon:
      return "half-kg";
    case ModelKind::schrodinger:
      return "schrodinger";
    case ModelKind::custom:
      return "custom";
  }
  return "custom";
}

double eval_derivatives(const DispersionModel& model, double rho, int order) {
  if (!(rho > 0.0)) {
    fail(ErrorKind::domain,
         "dispersion relation is evaluated only at rho > 0 (P is smooth "
         "away from the origin)");
  }
  if (order < 0 || order > 2) {
    fail(ErrorKind::usage,
         "unsupported derivative order; P is tracked through second order");
  }
  switch (model.kind) {
    case ModelKind::fractional:
    case ModelKind::gravity_ww:
    case ModelKind::capillary_ww:
    case ModelKind::schrodinger:
      return fractional_eval(model.p, rho, order);
    case ModelKind::gravity_ww_depth:
      return depth_eval(0.5, model.h, rho, order);
    case ModelKind::capillary_ww_depth:
      return depth_eval(1.5, model.h, rho, order);
    case ModelKind::half_klein_gordon:
      return half_kg_eval(rho, order);
    case ModelKind::custom:
      if (!model.custom_eval) {
        fail(ErrorKind::usage,
             "custom dispersion model has no evaluation callback");
      }
      return model.custom_eval(rho, order);
  }
  fail(ErrorKind::usage, "unhandled dispersion model kind");
}

double invert_velocity(const DispersionModel& model, double r) {
  if (!(r >= 0.0)) {
    fail(ErrorKind::domain, "group velocities are nonnegative");
  }
  const double inf = std::numeric_limits<double>::infinity();
  switch (model.kind) {
    case ModelKind::fractional:
    case ModelKind::gravity_ww:
    case ModelKind::capillary_ww:
    case ModelKind::schrodinger:
      // P'(rho) = rho^p: exact inverse r^{1/p}; the boundary r = 0 maps to
      // 0 (increasing) or +inf (decreasing).
      if (r == 0.0) return model.p > 0 ? 0.0 : inf;
      return std::pow(r, 1.0 / model.p);
    case ModelKind::half_klein_gordon:
      // P' = rho / <rho> has range [0, 1[.
      if (r >= 1.0) return inf;
      return r / std::sqrt(1.0 - r * r);
    case ModelKind::capillary_ww_depth:
      if (r == 0.0) return 0.0;
      return bisect_inverse(model, r);
    case ModelKind::gravity_ww_depth:
      fail(ErrorKind::domain,
           "group velocity of the finite-depth gravity model is not "
           "monotone; it has no global inverse");
    case ModelKind::custom:
      if (r == 0.0) return model.convexity > 0 ? 0.0 : inf;
      return bisect_inverse(model, r);
  }
  fail(ErrorKind::usage, "unhandled dispersion model kind");
}

HypothesisReport verify_hypothesis(const DispersionModel& model,
                                   std::span<const double> rho_grid) {
  const std::size_t n = rho_grid.size();
  if (n < 12) {
    fail(ErrorKind::usage,
         "hypothesis grid needs at least 12 points to resolve both "
         "asymptotic regimes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rho_grid[i] > 0.0)) {
      fail(ErrorKind::usage, "hypothesis grid must be strictly positive");
    }
    if (i > 0 && !(rho_grid[i] > rho_grid[i - 1])) {
      fail(ErrorKind::usage, "hypothesis grid must be strictly increasing");
    }
  }
  if (rho_grid.front() > 1e-3 * (1.0 + 1e-9) ||
      rho_grid.back() < 1e3 * (1.0 - 1e-9)) {
    fail(ErrorKind::usage, "hypothesis grid must span at least [1e-3, 1e3]");
  }

  HypothesisReport rep;
  rep.monotone = true;
  rep.curvature_sign_constant = true;
  const double dir = static_cast<double>(model.convexity);

  double prev_velocity = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = rho_grid[i];
    const double v = eval_derivatives(model, rho, 1);
    const double c = eval_derivatives(model, rho, 2);
    if (!(v > 0.0)) {
      rep.monotone = false;
      if (std::isnan(rep.offending_rho)) rep.offending_rho = rho;
      if (rep.detail.empty()) {
        rep.detail = "group velocity is not strictly positive at rho = " +
                     format_double(rho);
      }
    } else if (i > 0 && !((v - prev_velocity) * dir > 0.0)) {
      rep.monotone = false;
      if (std::isnan(rep.offending_rho)) rep.offending_rho = rho;
      if (rep.detail.empty()) {
        rep.detail = "group velocity is not strictly monotone near rho = " +
                     format_double(rho);
      }
    }
    if (!(c * dir > 0.0)) {
      rep.curvature_sign_constant = false;
      if (std::isnan(rep.offending_rho)) rep.offending_rho = rho;
      if (rep.detail.empty()) {
        rep.detail = "second derivative changes sign near rho = " +
                     format_double(rho);
      }
    }
    prev_velocity = v;
  }

  const std::size_t third = n / 3;
  const auto track = [](RatioBand& band, double ratio) {
    band.min = std::min(band.min, ratio);
    band.max = std::max(band.max, ratio);
  };
  for (std::size_t i = 0; i < third; ++i) {
    const double rho = rho_grid[i];
    const double v = eval_derivatives(model, rho, 1);
    const double c = eval_derivatives(model, rho, 2);
    track(rep.low_velocity, std::abs(v - model.P0) / std::pow(rho, model.p0));
    track(rep.low_curvature, std::abs(c) / std::pow(rho, model.p0 - 1.0));
  }
  for (std::size_t i = n - third; i < n; ++i) {
    const double rho = rho_grid[i];
    const double v = eval_derivatives(model, rho, 1);
    const double c = eval_derivatives(model, rho, 2);
    track(rep.high_velocity, std::abs(v - model.P1) / std::pow(rho, model.p1));
    track(rep.high_curvature, std::abs(c) / std::pow(rho, model.p1 - 1.0));
  }

  const auto in_band = [&](const RatioBand& band) {
    return band.min >= rep.band_lo && band.max <= rep.band_hi;
  };
  const bool ratios_ok = in_band(rep.low_velocity) &&
                         in_band(rep.low_curvature) &&
                         in_band(rep.high_velocity) &&
                         in_band(rep.high_curvature);
  if (!ratios_ok && rep.detail.empty()) {
    rep.detail =
        "asymptotic ratio left the accepted band [" +
        format_double(rep.band_lo) + ", " + format_double(rep.band_hi) + "]";
  }
  rep.pass = rep.monotone && rep.curvature_sign_constant && ratios_ok;
  return rep;
}

EpsilonBounds epsilon_bounds(const DispersionModel& model) {
  if (!(model.p1 < 0.0 && model.p0 > 0.0)) {
    fail(ErrorKind::regime,
         "frequency-window exponent bounds need a group velocity that "
         "saturates at high frequency and vanishes at low frequency "
         "(p1 < 0 < p0)");
  }
  EpsilonBounds b;
  b.eps0_max = 1.0 / (model.p0 + 1.0);
  if (model.p1 >= -1.0) {
    b.eps1_max = std::numeric_limits<double>::infinity();
  } else {
    b.eps1_max = 1.0 / (-(model.p1 + 1.0));
  }
  return b;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    fail(ErrorKind::usage,
         "log grid needs 0 < lo < hi and at least two points");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  const double la = std::log(lo);
  const double lb = std::log(hi);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        std::exp(la + (lb - la) * static_cast<double>(i) /
                          static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace microloc
