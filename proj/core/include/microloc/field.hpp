// Periodic grids standing in for R^d, discrete Fourier transforms with the
// continuum normalization, initial-data synthesis from spectral profiles,
// norms, Fourier multipliers, and flat binary state serialization.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "microloc/common.hpp"

namespace microloc {

// Uniform grid over [-L, L)^d with n samples per axis. Spatial nodes are
// x_j = -L + j*dx; spectral storage is centered, with storage index k per
// axis holding the frequency xi = pi*(k - n/2)/L.
struct GridSpec {
  int d = 1;
  int n = 0;
  double L = 0.0;

  static GridSpec make(int d, int n, double L);

  double dx() const { return 2.0 * L / n; }
  double dxi() const { return kPi / L; }
  double xi_max() const { return kPi * n / (2.0 * L); }
  std::int64_t point_count() const {
    return d == 1 ? n : static_cast<std::int64_t>(n) * n;
  }
  double x_at(int j) const { return -L + j * dx(); }
  double xi_at(int k) const { return dxi() * (k - n / 2); }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.d == b.d && a.n == b.n && a.L == b.L;
  }
};

// Immutable after construction; values and coeffs always stay consistent
// (coeffs follow the convention u_hat(xi_k) = dx^d sum_x e^{-i x xi_k} u(x)).
struct FieldState {
  GridSpec grid;
  std::vector<cdouble> values;  // row-major over spatial nodes
  std::vector<cdouble> coeffs;  // row-major over centered spectral nodes
  // False when the synthesized spectrum does not vanish (to the numerical
  // floor) in a neighborhood of xi = 0.
  bool origin_clear = true;
};

enum class ProfileKind { annulus_bump, gaussian, custom };

struct SpectralProfile {
  ProfileKind kind = ProfileKind::annulus_bump;
  double rho_a = 1.0;  // annulus inner radius, must stay positive
  double rho_b = 2.0;  // annulus outer radius
  std::array<double, 2> center{0.0, 0.0};  // gaussian center
  double width = 1.0;                      // gaussian width
  std::function<cdouble(std::array<double, 2>)> table;  // custom kind
  double target_norm = 1.0;

  static SpectralProfile annulus(double rho_a, double rho_b,
                                 double target_norm = 1.0);
  static SpectralProfile gaussian(std::array<double, 2> center, double width,
                                  double target_norm = 1.0);
  static SpectralProfile custom(std::function<cdouble(std::array<double, 2>)> f,
                                double target_norm = 1.0);
};

// The unnormalised profile law at one spectral point (second component zero
// in dimension one). synthesize_data samples this on the grid and rescales
// to the target L2 norm afterwards, so values here carry no normalisation.
cdouble profile_value(const SpectralProfile& profile,
                      std::array<double, 2> xi);

// Builds the state whose spectrum follows the profile, rescaled to the
// target L2 norm. Errors with ErrorKind::resolution when the grid cannot
// resolve the profile (Nyquist headroom < twice the support radius, or
// fewer than 16 nodes across the annulus width).
FieldState synthesize_data(const SpectralProfile& profile,
                           const GridSpec& grid);

enum class Direction { forward, inverse };

// forward: refresh coeffs from values; inverse: refresh values from coeffs.
FieldState transform(const FieldState& state, Direction direction);

FieldState state_from_values(const GridSpec& grid,
                             std::vector<cdouble> values);
FieldState state_from_coeffs(const GridSpec& grid,
                             std::vector<cdouble> coeffs);

enum class NormKind { l2, h1, sup };

double norm(const FieldState& state, NormKind kind);

// Multipliers receive the frequency node (xi_1, xi_2); the second component
// is 0 in dimension one.
using Multiplier = std::function<cdouble(std::array<double, 2>)>;

// Pointwise multiplication of the spectrum, values refreshed. A non-finite
// multiplier value at a node carrying nonzero spectrum is a numeric error.
FieldState apply_multiplier(const Multiplier& m, const FieldState& state);

// Fraction of the squared L2 mass at Euclidean |x| > fraction * L; the
// wrap-around monitor for the periodic proxy.
double exterior_mass_fraction(const FieldState& state, double fraction = 0.9);

// Flat little-endian layout: d, n (int64), L (double), then re/im pairs of
// the values in row-major node order.
void save_state(const FieldState& state, const std::string& path);
FieldState load_state(const std::string& path);

}  // namespace microloc
