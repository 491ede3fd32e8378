// Circle and point-pair averages of the oscillatory cutoff integrand, their
// stationary-phase principal terms, and log-log decay sweeps of the
// remainder.
#include "microloc/statphase.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "microloc/linear_fit.hpp"
#include "microloc/parallel.hpp"
#include "microloc/quadrature.hpp"

namespace microloc {
namespace {

constexpr std::int64_t kMaxPanels = std::int64_t{1} << 20;

void require_dim(int dim) {
  if (dim != 1 && dim != 2) {
    fail(ErrorKind::usage, "dimension must be 1 or 2");
  }
}

void require_cutoff(const CutoffSpec& cutoff) {
  if (!(cutoff.chi_scale > 0.0) || !std::isfinite(cutoff.chi_scale)) {
    fail(ErrorKind::domain, "cutoff scale must be positive and finite");
  }
  if (!(cutoff.lambda1 > 0.0) || !std::isfinite(cutoff.lambda1)) {
    fail(ErrorKind::domain, "cutoff weight lambda1 must be positive");
  }
  if (!std::isfinite(cutoff.sigma0) || !std::isfinite(cutoff.sigma1) ||
      !std::isfinite(cutoff.delta)) {
    fail(ErrorKind::domain, "cutoff exponents must be finite");
  }
}

void require_unit_omega(std::array<double, 2> omega, int dim) {
  const double len = std::hypot(omega[0], omega[1]);
  if (!(std::abs(len - 1.0) <= 1e-9)) {
    fail(ErrorKind::domain, "omega must be a unit vector");
  }
  if (dim == 1 && omega[1] != 0.0) {
    fail(ErrorKind::domain, "omega must be +1 or -1 in dimension one");
  }
}

void require_signs(int eps, int eps_prime) {
  if (eps != 1 && eps != -1) {
    fail(ErrorKind::usage, "eps must be +1 or -1");
  }
  if (eps_prime != 1 && eps_prime != -1) {
    fail(ErrorKind::usage, "eps_prime must be +1 or -1");
  }
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::domain, std::string(what) + " must be positive and finite");
  }
}

void require_case(const SphereIntegralCase& c) {
  require_dim(c.dim);
  require_cutoff(c.cutoff);
  require_signs(c.eps, c.eps_prime);
  require_unit_omega(c.omega, c.dim);
  require_positive(c.r, "radius");
  require_positive(c.rho, "frequency modulus");
  require_positive(c.t, "time");
}

// The cutoff window width t^{1/2+delta} Lambda(sqrt(t) rho).
double window_width(const SphereIntegralCase& c) {
  return std::pow(c.t, 0.5 + c.cutoff.delta) *
         lambda_weight(c.cutoff, std::sqrt(c.t) * c.rho);
}

cdouble pair_average(const SphereIntegralCase& c) {
  const double transport = c.t * eval_derivatives(c.model, c.rho, 1);
  const double width = window_width(c);
  cdouble acc{};
  for (const double side : {1.0, -1.0}) {
    const double theta = side * c.omega[0];
    const double gap =
        std::abs(c.r * c.omega[0] + c.eps * transport * theta);
    const double chi = chi_value(c.cutoff, gap / width);
    if (chi == 0.0) continue;
    const cdouble f = profile_value(c.amplitude, {c.rho * theta, 0.0});
    acc += std::polar(1.0, c.eps_prime * c.r * c.rho * side) * (chi * f);
  }
  return acc;
}

cdouble circle_average(const SphereIntegralCase& c) {
  const double transport = c.t * eval_derivatives(c.model, c.rho, 1);
  const double width = window_width(c);
  const double support = chi_support_radius(c.cutoff) * width;
  const double gap = std::abs(c.r - transport);
  if (gap >= support) return {};

  // chi is nonzero on an arc around the direction closest to (or farthest
  // from) omega: |r omega + eps T theta|^2 = (r-T)^2 + 4 r T sin^2(psi/2)
  // with psi measured from the arc center, so the half-width solves
  // sin(psi/2) = sqrt((S^2 - gap^2) / (4 r T)). Start the doubling with at
  // least eight panels inside the arc so it cannot alias to zero.
  const double q =
      (support * support - gap * gap) / (4.0 * c.r * transport);
  const double half_arc =
      q >= 1.0 ? kPi : 2.0 * std::asin(std::sqrt(q));
  if (half_arc * static_cast<double>(kMaxPanels >> 2) < 16.0 * kPi) {
    fail(ErrorKind::quadrature,
         "cutoff arc is too narrow to resolve within the panel budget");
  }
  std::int64_t start = 16;
  while (start < (kMaxPanels >> 2) &&
         static_cast<double>(start) * half_arc < 16.0 * kPi) {
    start *= 2;
  }

  const std::array<double, 2> perp{-c.omega[1], c.omega[0]};
  const double lam = c.r * c.rho;
  const auto integrand = [&](double phi) -> cdouble {
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    const double a2 = c.r * c.r + transport * transport +
                      2.0 * c.eps * c.r * transport * cp;
    const double chi =
        chi_value(c.cutoff, std::sqrt(std::max(a2, 0.0)) / width);
    if (chi == 0.0) return {};
    const std::array<double, 2> theta{cp * c.omega[0] + sp * perp[0],
                                      cp * c.omega[1] + sp * perp[1]};
    const cdouble f = profile_value(
        c.amplitude, {c.rho * theta[0], c.rho * theta[1]});
    return std::polar(1.0, c.eps_prime * lam * cp) * (chi * f);
  };
  const auto estimate = quad::trapezoid_doubling(integrand, 0.0, 2.0 * kPi,
                                                 1e-9, 0.0, start, kMaxPanels);
  if (!estimate.converged) {
    fail(ErrorKind::quadrature,
         "circle average did not settle within the panel budget");
  }
  return estimate.value;
}

}  // namespace

cdouble sphere_integral(const SphereIntegralCase& c) {
  require_case(c);
  return c.dim == 1 ? pair_average(c) : circle_average(c);
}

cdouble principal_term(const SphereIntegralCase& c) {
  require_case(c);
  const double transport = c.t * eval_derivatives(c.model, c.rho, 1);
  const double width = window_width(c);
  const double lam = c.r * c.rho;
  const double chi =
      chi_value(c.cutoff, std::abs(c.r - transport) / width);
  const cdouble f = profile_value(
      c.amplitude,
      {-c.eps * c.rho * c.omega[0], -c.eps * c.rho * c.omega[1]});
  const double signs = static_cast<double>(c.eps * c.eps_prime);
  if (c.dim == 1) {
    return std::polar(1.0, -signs * lam) * (chi * f);
  }
  return std::sqrt(2.0 * kPi / lam) *
         std::polar(1.0, signs * (kPi / 4.0 - lam)) * (chi * f);
}

SphereSweepStudy remainder_decay_study(const SphereSweepConfig& config) {
  require_dim(config.dim);
  require_cutoff(config.cutoff);
  require_signs(config.eps, config.eps_prime);
  require_unit_omega(config.omega, config.dim);
  require_positive(config.rho, "frequency modulus");
  require_positive(config.t_start, "sweep start time");
  if (!(config.t_factor > 1.0) || !std::isfinite(config.t_factor)) {
    fail(ErrorKind::usage, "sweep time factor must exceed one");
  }
  if (config.points < 4) {
    fail(ErrorKind::usage, "sweep needs at least four points");
  }
  const double spread_exp = config.cutoff.delta + 0.5 * config.cutoff.sigma1;
  if (spread_exp < 0.0 || spread_exp >= 0.5) {
    fail(ErrorKind::hypothesis,
         "effective spread exponent must lie in [0, 1/2[ for the expansion");
  }
  if (spread_exp == 0.0) {
    fail(ErrorKind::usage,
         "decay variable is frozen at spread exponent zero; nothing to sweep");
  }
  if (!(chi_value(config.cutoff, std::abs(config.chi_offset)) > 0.0)) {
    fail(ErrorKind::usage, "chi_offset lies outside the cutoff support");
  }
  const cdouble f_star = profile_value(
      config.amplitude, {-config.eps * config.rho * config.omega[0],
                         -config.eps * config.rho * config.omega[1]});
  if (!(std::abs(f_star) > 0.0)) {
    fail(ErrorKind::usage, "amplitude vanishes at the stationary direction");
  }

  const double speed = eval_derivatives(config.model, config.rho, 1);
  SphereSweepStudy study;
  study.rows.resize(static_cast<std::size_t>(config.points));
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    SphereSweepRow& row = study.rows[i];
    row.t = config.t_start * std::pow(config.t_factor, static_cast<double>(i));
    const double width =
        std::pow(row.t, 0.5 + config.cutoff.delta) *
        lambda_weight(config.cutoff, std::sqrt(row.t) * config.rho);
    const double r = row.t * speed + config.chi_offset * width;
    if (!(r > 0.0)) {
      fail(ErrorKind::domain, "sweep radius went nonpositive");
    }
    row.lambda = r * config.rho;
    row.mu = std::pow(row.t, spread_exp - 0.5);
    row.zeta = row.lambda * row.mu * row.mu;
  }
  const auto [zeta_min, zeta_max] = std::minmax_element(
      study.rows.begin(), study.rows.end(),
      [](const SphereSweepRow& a, const SphereSweepRow& b) {
        return a.zeta < b.zeta;
      });
  if (!(zeta_max->zeta >= 100.0 * zeta_min->zeta)) {
    fail(ErrorKind::usage,
         "sweep spans fewer than two decades of the decay variable");
  }

  parallel_for(config.points, [&](std::int64_t i) {
    SphereSweepRow& row = study.rows[static_cast<std::size_t>(i)];
    SphereIntegralCase c;
    c.model = config.model;
    c.cutoff = config.cutoff;
    c.amplitude = config.amplitude;
    c.r = row.lambda / config.rho;
    c.rho = config.rho;
    c.t = row.t;
    c.omega = config.omega;
    c.eps = config.eps;
    c.eps_prime = config.eps_prime;
    c.dim = config.dim;
    const cdouble integral = sphere_integral(c);
    const cdouble principal = principal_term(c);
    row.integral_mag = std::abs(integral);
    row.principal_mag = std::abs(principal);
    row.remainder_mag = std::abs(integral - principal);
  });

  std::vector<double> log_lambda(study.rows.size());
  std::vector<double> log_principal(study.rows.size());
  double rem_min = std::numeric_limits<double>::infinity();
  double rem_max = 0.0;
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    log_lambda[i] = std::log(study.rows[i].lambda);
    log_principal[i] = std::log(study.rows[i].principal_mag);
    rem_min = std::min(rem_min, study.rows[i].remainder_mag);
    rem_max = std::max(rem_max, study.rows[i].remainder_mag);
  }
  study.principal_slope = fit_line(log_lambda, log_principal).slope;

  if (rem_min <= 0.0) {
    study.inconclusive = true;
    return study;
  }
  std::vector<double> log_zeta(study.rows.size());
  std::vector<double> log_remainder(study.rows.size());
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    log_zeta[i] = std::log(study.rows[i].zeta);
    log_remainder[i] = std::log(study.rows[i].remainder_mag);
  }
  study.remainder_slope = fit_line(log_zeta, log_remainder).slope;
  study.inconclusive = rem_max < 1e3 * rem_min;

  const double dim_half = 0.5 * static_cast<double>(config.dim);
  const bool principal_ok =
      std::abs(study.principal_slope + dim_half - 0.5) <= 0.1;
  const bool remainder_ok = study.remainder_slope <= -(dim_half + 0.5) + 0.15;
  study.pass = !study.inconclusive && principal_ok && remainder_ok;
  return study;
}

}  // namespace microloc
