#include "microloc/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "microloc/linear_fit.hpp"
#include "microloc/parallel.hpp"

namespace microloc {

namespace {

// P(0+): finite for every supported kind that admits origin mass.
double dispersion_at_origin(const DispersionModel& model) {
  return model.kind == ModelKind::half_klein_gordon ? 1.0 : 0.0;
}

double origin_mass_fraction(const FieldState& state) {
  const GridSpec& g = state.grid;
  const std::size_t zero_idx =
      g.d == 1 ? static_cast<std::size_t>(g.n / 2)
               : static_cast<std::size_t>(g.n / 2) * g.n + g.n / 2;
  const double total = norm(state, NormKind::l2);
  if (total == 0.0) return 0.0;
  const double node = std::pow(g.dxi() / kTwoPi, g.d) *
                      std::norm(state.coeffs[zero_idx]);
  return node / (total * total);
}

void require_real(const FieldState& state, const char* which) {
  double peak = 0.0;
  double imag = 0.0;
  for (const cdouble& v : state.values) {
    peak = std::max(peak, std::abs(v));
    imag = std::max(imag, std::abs(v.imag()));
  }
  if (imag > 1e-12 * std::max(1.0, peak)) {
    fail(ErrorKind::domain,
         std::string(which) + " must be real-valued for the Klein-Gordon "
                              "reduction");
  }
}

// Radial support interval [lo, hi] of the profile, for speed bounds.
std::pair<double, double> radial_support(const SpectralProfile& profile) {
  switch (profile.kind) {
    case ProfileKind::annulus_bump:
      return {profile.rho_a, profile.rho_b};
    case ProfileKind::gaussian: {
      const double c = std::hypot(profile.center[0], profile.center[1]);
      return {std::max(c - 6.0 * profile.width, 0.0),
              c + 6.0 * profile.width};
    }
    case ProfileKind::custom:
      fail(ErrorKind::usage,
           "custom profiles carry no support bound; supply the grid "
           "explicitly");
  }
  fail(ErrorKind::usage, "unhandled profile kind");
}

int ceil_power_of_two(double x) {
  int n = 4;
  while (static_cast<double>(n) < x) {
    if (n > (1 << 29)) {
      fail(ErrorKind::resolution, "grid size overflows the sane range");
    }
    n *= 2;
  }
  return n;
}

}  // namespace

bool singular_at_origin(const DispersionModel& model) {
  switch (model.kind) {
    case ModelKind::gravity_ww:
    case ModelKind::capillary_ww:
    case ModelKind::gravity_ww_depth:
    case ModelKind::capillary_ww_depth:
      return true;
    case ModelKind::fractional:
    case ModelKind::schrodinger:
      // P'' = p rho^{p-1} stays bounded at the origin only from p = 1 up.
      return model.p < 1.0;
    case ModelKind::half_klein_gordon:
    case ModelKind::custom:
      return false;
  }
  return false;
}

FieldState evolve(const DispersionModel& model, const FieldState& u0,
                  double t) {
  if (singular_at_origin(model) && origin_mass_fraction(u0) >= 1e-14) {
    fail(ErrorKind::domain,
         "dispersion relation is singular at xi = 0 but the data carries "
         "spectral mass there");
  }
  const double at_origin = dispersion_at_origin(model);
  const Multiplier phase = [&model, t,
                            at_origin](std::array<double, 2> xi) -> cdouble {
    const double rho = std::hypot(xi[0], xi[1]);
    const double p = rho == 0.0 ? at_origin : eval_derivatives(model, rho, 0);
    return std::exp(cdouble{0.0, t * p});
  };
  return apply_multiplier(phase, u0);
}

KGState kg_evolve(const FieldState& w0, const FieldState& w1, double t) {
  if (!(w0.grid == w1.grid)) {
    fail(ErrorKind::usage, "w0 and w1 must share a grid");
  }
  require_real(w0, "w0");
  require_real(w1, "w1");

  const GridSpec& g = w0.grid;
  std::vector<cdouble> u0_coeffs(w0.coeffs.size());
  if (g.d == 1) {
    for (int k = 0; k < g.n; ++k) {
      const auto idx = static_cast<std::size_t>(k);
      const double br = japanese_bracket(std::abs(g.xi_at(k)));
      u0_coeffs[idx] = br * w0.coeffs[idx] - kI * w1.coeffs[idx];
    }
  } else {
    std::size_t idx = 0;
    for (int k1 = 0; k1 < g.n; ++k1) {
      for (int k2 = 0; k2 < g.n; ++k2, ++idx) {
        const double br =
            japanese_bracket(std::hypot(g.xi_at(k1), g.xi_at(k2)));
        u0_coeffs[idx] = br * w0.coeffs[idx] - kI * w1.coeffs[idx];
      }
    }
  }

  const FieldState u0 = state_from_coeffs(g, std::move(u0_coeffs));
  const FieldState u = evolve(DispersionModel::half_klein_gordon(), u0, t);

  std::vector<cdouble> re_u(u.values.size());
  std::vector<cdouble> wt_vals(u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    re_u[i] = cdouble{u.values[i].real(), 0.0};
    wt_vals[i] = cdouble{-u.values[i].imag(), 0.0};
  }
  const Multiplier inv_bracket = [](std::array<double, 2> xi) -> cdouble {
    return 1.0 / japanese_bracket(std::hypot(xi[0], xi[1]));
  };

  KGState out;
  out.w = apply_multiplier(inv_bracket, state_from_values(g, std::move(re_u)));
  out.wt = state_from_values(g, std::move(wt_vals));
  out.u = u;
  return out;
}

double kg_energy(const KGState& state) {
  const double wt_l2 = norm(state.wt, NormKind::l2);
  const double w_h1 = norm(state.w, NormKind::h1);
  return wt_l2 * wt_l2 + w_h1 * w_h1;
}

double max_group_speed(const DispersionModel& model,
                       const SpectralProfile& profile) {
  const auto [lo, hi] = radial_support(profile);
  if (!(lo > 0.0) && singular_at_origin(model)) {
    fail(ErrorKind::domain,
         "spectral support touches the origin where the group velocity "
         "is unbounded for this dispersion model");
  }
  const double floor = std::max(lo, 1e-12 * hi);
  double vmax = 0.0;
  for (int i = 0; i <= 256; ++i) {
    const double rho = floor + (hi - floor) * i / 256.0;
    vmax = std::max(vmax, std::abs(eval_derivatives(model, rho, 1)));
  }
  return vmax;
}

GridSpec choose_grid(const DispersionModel& model,
                     const SpectralProfile& profile, int d, double t,
                     int n_cap) {
  const auto [lo, hi] = radial_support(profile);
  const double vmax = max_group_speed(model, profile);
  double cushion = 0.0;
  if (profile.kind == ProfileKind::annulus_bump) {
    cushion = 32.0 * kPi / (profile.rho_b - profile.rho_a);
  } else {
    cushion = 16.0 / profile.width;
  }
  const double travel = std::abs(t) * vmax;
  const double L = std::max(1.5 * (1.0 + travel), travel + cushion);
  // Nyquist headroom: pi n / (2 L) >= 2 * support radius.
  const int n = ceil_power_of_two(4.0 * L * hi / kPi);
  if (n > n_cap) {
    fail(ErrorKind::resolution,
         "resolving this time horizon needs " + std::to_string(n) +
             " nodes per axis, beyond the configured cap of " +
             std::to_string(n_cap));
  }
  return GridSpec::make(d, n, L);
}

DecayStudy dispersion_decay(const DispersionModel& model,
                            const SpectralProfile& profile, int d,
                            std::span<const double> t_list, int n_cap) {
  std::vector<double> times;
  times.reserve(t_list.size());
  for (double t : t_list) {
    if (t < 0.0) {
      fail(ErrorKind::usage, "decay study times must be nonnegative");
    }
    if (t > 0.0) times.push_back(t);
  }
  if (times.size() < 2) {
    fail(ErrorKind::usage, "decay study needs at least two positive times");
  }
  std::sort(times.begin(), times.end());

  DecayStudy study;
  study.rows.resize(times.size());
  parallel_for(static_cast<std::int64_t>(times.size()), [&](std::int64_t i) {
    const double t = times[static_cast<std::size_t>(i)];
    const GridSpec grid = choose_grid(model, profile, d, t, n_cap);
    const FieldState u0 = synthesize_data(profile, grid);
    if (!u0.origin_clear) {
      fail(ErrorKind::domain,
           "decay study needs data supported away from xi = 0");
    }
    const FieldState ut = evolve(model, u0, t);
    DecayRow row;
    row.t = t;
    row.sup_norm = norm(ut, NormKind::sup);
    row.grid = grid;
    row.wrap_mass = exterior_mass_fraction(ut);
    if (row.wrap_mass >= 1e-6) {
      fail(ErrorKind::box,
           "outgoing wave reached the periodic wrap monitor; the box "
           "policy is too tight for this configuration");
    }
    study.rows[static_cast<std::size_t>(i)] = row;
  });

  const double t_max = times.back();
  std::vector<double> log_t;
  std::vector<double> log_sup;
  for (const DecayRow& row : study.rows) {
    if (row.t >= 0.5 * t_max) {
      log_t.push_back(std::log(row.t));
      log_sup.push_back(std::log(row.sup_norm));
    }
  }
  if (log_t.size() < 2) {
    fail(ErrorKind::usage,
         "decay study needs at least two samples in the top octave of t");
  }
  study.slope = fit_line(log_t, log_sup).slope;
  return study;
}

}  // namespace microloc
