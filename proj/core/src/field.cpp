#include "microloc/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <utility>

#include "fft.hpp"
#include "microloc/windows.hpp"

namespace microloc {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Walks every node of the grid, handing the callback the flat index and the
// frequency node (xi_1, xi_2); xi_2 stays 0 in dimension one.
template <class F>
void for_each_frequency(const GridSpec& grid, F&& body) {
  if (grid.d == 1) {
    for (int k = 0; k < grid.n; ++k) {
      body(static_cast<std::size_t>(k),
           std::array<double, 2>{grid.xi_at(k), 0.0});
    }
  } else {
    std::size_t idx = 0;
    for (int k1 = 0; k1 < grid.n; ++k1) {
      for (int k2 = 0; k2 < grid.n; ++k2, ++idx) {
        body(idx, std::array<double, 2>{grid.xi_at(k1), grid.xi_at(k2)});
      }
    }
  }
}

double squared_l2_from_coeffs(const GridSpec& grid,
                              const std::vector<cdouble>& coeffs) {
  double acc = 0.0;
  for (const cdouble& c : coeffs) acc += std::norm(c);
  return std::pow(grid.dxi() / kTwoPi, grid.d) * acc;
}

// True when the spectrum vanishes, to the numerical floor, on the nodes
// adjacent to xi = 0.
bool spectrum_clears_origin(const GridSpec& grid,
                            const std::vector<cdouble>& coeffs) {
  double peak = 0.0;
  for (const cdouble& c : coeffs) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) return true;
  bool clear = true;
  const double reach = 1.5 * grid.dxi();
  for_each_frequency(grid, [&](std::size_t idx, std::array<double, 2> xi) {
    const double r = std::hypot(xi[0], xi[1]);
    if (r <= reach && std::abs(coeffs[idx]) > 1e-12 * peak) clear = false;
  });
  return clear;
}

FieldState assemble_from_coeffs(const GridSpec& grid,
                                std::vector<cdouble> coeffs) {
  FieldState state;
  state.grid = grid;
  state.coeffs = std::move(coeffs);
  state.values.resize(state.coeffs.size());
  detail::inverse_fft(grid, state.coeffs.data(), state.values.data());
  state.origin_clear = spectrum_clears_origin(grid, state.coeffs);
  return state;
}

}  // namespace

GridSpec GridSpec::make(int d, int n, double L) {
  if (d != 1 && d != 2) {
    fail(ErrorKind::usage, "grid dimension must be 1 or 2");
  }
  if (!is_power_of_two(n) || n < 4) {
    fail(ErrorKind::usage,
         "samples per axis must be a power of two, at least 4");
  }
  if (!(L > 0.0)) {
    fail(ErrorKind::usage, "box half-length must be positive");
  }
  GridSpec g;
  g.d = d;
  g.n = n;
  g.L = L;
  return g;
}

SpectralProfile SpectralProfile::annulus(double rho_a, double rho_b,
                                         double target_norm) {
  if (!(rho_a > 0.0) || !(rho_b > rho_a)) {
    fail(ErrorKind::usage, "annulus needs 0 < rho_a < rho_b");
  }
  if (!(target_norm > 0.0)) {
    fail(ErrorKind::usage, "target norm must be positive");
  }
  SpectralProfile p;
  p.kind = ProfileKind::annulus_bump;
  p.rho_a = rho_a;
  p.rho_b = rho_b;
  p.target_norm = target_norm;
  return p;
}

SpectralProfile SpectralProfile::gaussian(std::array<double, 2> center,
                                          double width, double target_norm) {
  if (!(width > 0.0)) {
    fail(ErrorKind::usage, "gaussian width must be positive");
  }
  if (!(target_norm > 0.0)) {
    fail(ErrorKind::usage, "target norm must be positive");
  }
  SpectralProfile p;
  p.kind = ProfileKind::gaussian;
  p.center = center;
  p.width = width;
  p.target_norm = target_norm;
  return p;
}

SpectralProfile SpectralProfile::custom(
    std::function<cdouble(std::array<double, 2>)> f, double target_norm) {
  if (!f) {
    fail(ErrorKind::usage, "custom profile needs an evaluation callback");
  }
  if (!(target_norm > 0.0)) {
    fail(ErrorKind::usage, "target norm must be positive");
  }
  SpectralProfile p;
  p.kind = ProfileKind::custom;
  p.table = std::move(f);
  p.target_norm = target_norm;
  return p;
}

cdouble profile_value(const SpectralProfile& profile,
                      std::array<double, 2> xi) {
  switch (profile.kind) {
    case ProfileKind::annulus_bump: {
      const double r = std::hypot(xi[0], xi[1]);
      const double s = (2.0 * r - profile.rho_a - profile.rho_b) /
                       (profile.rho_b - profile.rho_a);
      return smooth_bump(s);
    }
    case ProfileKind::gaussian: {
      const double d0 = xi[0] - profile.center[0];
      const double d1 = xi[1] - profile.center[1];
      return gaussian_window(std::hypot(d0, d1) / profile.width);
    }
    case ProfileKind::custom:
      return profile.table(xi);
  }
  fail(ErrorKind::usage, "unknown profile kind");
}

FieldState synthesize_data(const SpectralProfile& profile,
                           const GridSpec& grid) {
  switch (profile.kind) {
    case ProfileKind::annulus_bump: {
      if (grid.xi_max() < 2.0 * profile.rho_b) {
        fail(ErrorKind::resolution,
             "grid Nyquist frequency is below twice the annulus outer "
             "radius");
      }
      if ((profile.rho_b - profile.rho_a) / grid.dxi() < 16.0) {
        fail(ErrorKind::resolution,
             "fewer than 16 frequency nodes across the annulus width");
      }
      break;
    }
    case ProfileKind::gaussian: {
      const double reach =
          std::hypot(profile.center[0], profile.center[1]) +
          6.0 * profile.width;
      if (grid.xi_max() < 2.0 * reach) {
        fail(ErrorKind::resolution,
             "grid Nyquist frequency is below twice the gaussian support "
             "radius");
      }
      if (profile.width / grid.dxi() < 4.0) {
        fail(ErrorKind::resolution,
             "fewer than 4 frequency nodes across the gaussian width");
      }
      break;
    }
    case ProfileKind::custom:
      break;
  }

  std::vector<cdouble> coeffs(static_cast<std::size_t>(grid.point_count()));
  for_each_frequency(grid, [&](std::size_t idx, std::array<double, 2> xi) {
    coeffs[idx] = profile_value(profile, xi);
  });

  const double l2 = std::sqrt(squared_l2_from_coeffs(grid, coeffs));
  if (!(l2 > 0.0)) {
    fail(ErrorKind::numeric, "synthesized profile has zero mass on the grid");
  }
  const double scale = profile.target_norm / l2;
  for (cdouble& c : coeffs) c *= scale;
  return assemble_from_coeffs(grid, std::move(coeffs));
}

FieldState transform(const FieldState& state, Direction direction) {
  FieldState out = state;
  if (direction == Direction::forward) {
    detail::forward_fft(state.grid, state.values.data(), out.coeffs.data());
  } else {
    detail::inverse_fft(state.grid, state.coeffs.data(), out.values.data());
  }
  return out;
}

FieldState state_from_values(const GridSpec& grid,
                             std::vector<cdouble> values) {
  if (values.size() != static_cast<std::size_t>(grid.point_count())) {
    fail(ErrorKind::usage, "value array does not match the grid size");
  }
  FieldState state;
  state.grid = grid;
  state.values = std::move(values);
  state.coeffs.resize(state.values.size());
  detail::forward_fft(grid, state.values.data(), state.coeffs.data());
  state.origin_clear = spectrum_clears_origin(grid, state.coeffs);
  return state;
}

FieldState state_from_coeffs(const GridSpec& grid,
                             std::vector<cdouble> coeffs) {
  if (coeffs.size() != static_cast<std::size_t>(grid.point_count())) {
    fail(ErrorKind::usage, "coefficient array does not match the grid size");
  }
  return assemble_from_coeffs(grid, std::move(coeffs));
}

double norm(const FieldState& state, NormKind kind) {
  switch (kind) {
    case NormKind::l2:
      return std::sqrt(squared_l2_from_coeffs(state.grid, state.coeffs));
    case NormKind::h1: {
      double acc = 0.0;
      for_each_frequency(state.grid,
                         [&](std::size_t idx, std::array<double, 2> xi) {
                           const double br =
                               japanese_bracket(std::hypot(xi[0], xi[1]));
                           acc += br * br * std::norm(state.coeffs[idx]);
                         });
      return std::sqrt(std::pow(state.grid.dxi() / kTwoPi, state.grid.d) *
                       acc);
    }
    case NormKind::sup: {
      double peak = 0.0;
      for (const cdouble& v : state.values) {
        peak = std::max(peak, std::abs(v));
      }
      return peak;
    }
  }
  fail(ErrorKind::usage, "unhandled norm kind");
}

FieldState apply_multiplier(const Multiplier& m, const FieldState& state) {
  if (!m) fail(ErrorKind::usage, "multiplier callback is empty");
  std::vector<cdouble> coeffs(state.coeffs.size());
  for_each_frequency(state.grid,
                     [&](std::size_t idx, std::array<double, 2> xi) {
                       const cdouble c = state.coeffs[idx];
                       const cdouble factor = m(xi);
                       if (!std::isfinite(factor.real()) ||
                           !std::isfinite(factor.imag())) {
                         if (c != cdouble{0.0, 0.0}) {
                           fail(ErrorKind::numeric,
                                "multiplier is not finite at a frequency "
                                "node carrying spectrum");
                         }
                         coeffs[idx] = cdouble{0.0, 0.0};
                         return;
                       }
                       coeffs[idx] = factor * c;
                     });
  FieldState out;
  out.grid = state.grid;
  out.coeffs = std::move(coeffs);
  out.values.resize(out.coeffs.size());
  detail::inverse_fft(out.grid, out.coeffs.data(), out.values.data());
  out.origin_clear = state.origin_clear;
  return out;
}

double exterior_mass_fraction(const FieldState& state, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    fail(ErrorKind::usage, "monitor fraction must lie in ]0, 1[");
  }
  const GridSpec& g = state.grid;
  const double cut = fraction * g.L;
  double total = 0.0;
  double outside = 0.0;
  if (g.d == 1) {
    for (int j = 0; j < g.n; ++j) {
      const double w = std::norm(state.values[static_cast<std::size_t>(j)]);
      total += w;
      if (std::abs(g.x_at(j)) > cut) outside += w;
    }
  } else {
    std::size_t idx = 0;
    for (int j1 = 0; j1 < g.n; ++j1) {
      for (int j2 = 0; j2 < g.n; ++j2, ++idx) {
        const double w = std::norm(state.values[idx]);
        total += w;
        if (std::hypot(g.x_at(j1), g.x_at(j2)) > cut) outside += w;
      }
    }
  }
  return total > 0.0 ? outside / total : 0.0;
}

void save_state(const FieldState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  const std::int64_t d = state.grid.d;
  const std::int64_t n = state.grid.n;
  const double L = state.grid.L;
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&L), sizeof(L));
  for (const cdouble& v : state.values) {
    const double re = v.real();
    const double im = v.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof(re));
    out.write(reinterpret_cast<const char*>(&im), sizeof(im));
  }
  if (!out) fail(ErrorKind::io, "write to '" + path + "' failed");
}

FieldState load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "' for reading");
  std::int64_t d = 0;
  std::int64_t n = 0;
  double L = 0.0;
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&L), sizeof(L));
  if (!in) fail(ErrorKind::io, "state file '" + path + "' has no header");
  const GridSpec grid =
      GridSpec::make(static_cast<int>(d), static_cast<int>(n), L);
  std::vector<cdouble> values(static_cast<std::size_t>(grid.point_count()));
  for (cdouble& v : values) {
    double re = 0.0;
    double im = 0.0;
    in.read(reinterpret_cast<char*>(&re), sizeof(re));
    in.read(reinterpret_cast<char*>(&im), sizeof(im));
    v = cdouble{re, im};
  }
  if (!in) fail(ErrorKind::io, "state file '" + path + "' is truncated");
  return state_from_values(grid, std::move(values));
}

}  // namespace microloc
