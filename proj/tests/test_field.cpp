#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <random>
#include <vector>

#include "doctest.h"
#include "microloc/field.hpp"

using microloc::cdouble;
using microloc::Direction;
using microloc::ErrorKind;
using microloc::FieldState;
using microloc::GridSpec;
using microloc::NormKind;
using microloc::SpectralProfile;

namespace {

template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const microloc::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

std::vector<cdouble> random_values(std::size_t count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<cdouble> out(count);
  for (cdouble& v : out) v = cdouble{dist(rng), dist(rng)};
  return out;
}

double max_abs_diff(const std::vector<cdouble>& a,
                    const std::vector<cdouble>& b) {
  double peak = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    peak = std::max(peak, std::abs(a[i] - b[i]));
  }
  return peak;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK(thrown_kind([] { GridSpec::make(3, 64, 10.0); }) == ErrorKind::usage);
  CHECK(thrown_kind([] { GridSpec::make(1, 48, 10.0); }) == ErrorKind::usage);
  CHECK(thrown_kind([] { GridSpec::make(1, 64, 0.0); }) == ErrorKind::usage);
  const GridSpec g = GridSpec::make(1, 64, 8.0);
  CHECK(g.dx() == doctest::Approx(0.25));
  CHECK(g.dxi() == doctest::Approx(microloc::kPi / 8.0));
  CHECK(g.xi_at(32) == 0.0);
  CHECK(g.x_at(0) == -8.0);
}

TEST_CASE("annulus synthesis: unit norm, compact support, radial symmetry") {
  const GridSpec g = GridSpec::make(1, 256, 16.0 * microloc::kPi);
  const FieldState u = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);

  CHECK(norm(u, NormKind::l2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.origin_clear);

  for (int k = 0; k < g.n; ++k) {
    const double r = std::abs(g.xi_at(k));
    if (r < 1.0 || r > 2.0) {
      CHECK(std::abs(u.coeffs[static_cast<std::size_t>(k)]) == 0.0);
    }
  }
  // Radial spectrum implies even, real-valued samples.
  for (int j = 1; j < g.n; ++j) {
    const cdouble a = u.values[static_cast<std::size_t>(j)];
    const cdouble b = u.values[static_cast<std::size_t>(g.n - j)];
    CHECK(std::abs(a - b) <= 1e-12);
    CHECK(std::abs(a.imag()) <= 1e-12);
  }
  // The wrap-around monitor needs box headroom beyond the 16-node floor:
  // the bump's spatial tail clears 1e-6 once L reaches 32 pi / (rho_b - rho_a).
  const GridSpec wide = GridSpec::make(1, 512, 32.0 * microloc::kPi);
  const FieldState uw =
      synthesize_data(SpectralProfile::annulus(1.0, 2.0), wide);
  CHECK(microloc::exterior_mass_fraction(uw) < 1e-6);
}

TEST_CASE("synthesis resolution errors") {
  CHECK(thrown_kind([] {
          synthesize_data(SpectralProfile::annulus(1.0, 2.0),
                          GridSpec::make(1, 32, 16.0 * microloc::kPi));
        }) == ErrorKind::resolution);
  CHECK(thrown_kind([] {
          synthesize_data(SpectralProfile::annulus(1.0, 2.0),
                          GridSpec::make(1, 256, 2.0));
        }) == ErrorKind::resolution);
}

TEST_CASE("gaussian profiles flag spectra touching the origin") {
  const GridSpec g = GridSpec::make(1, 512, 16.0 * microloc::kPi);
  const FieldState centered =
      synthesize_data(SpectralProfile::gaussian({0.0, 0.0}, 1.0), g);
  CHECK_FALSE(centered.origin_clear);
  CHECK(norm(centered, NormKind::l2) == doctest::Approx(1.0).epsilon(1e-12));

  const FieldState offset =
      synthesize_data(SpectralProfile::gaussian({3.0, 0.0}, 0.25), g);
  CHECK(offset.origin_clear);
}

TEST_CASE("transform round trip and Plancherel") {
  for (int d : {1, 2}) {
    const GridSpec g = GridSpec::make(d, d == 1 ? 256 : 64, 10.0);
    const auto vals =
        random_values(static_cast<std::size_t>(g.point_count()), 7u + d);
    const FieldState u = microloc::state_from_values(g, vals);

    double direct = 0.0;
    for (const cdouble& v : u.values) direct += std::norm(v);
    direct *= std::pow(g.dx(), g.d);
    const double spectral = norm(u, NormKind::l2);
    CHECK(spectral * spectral == doctest::Approx(direct).epsilon(1e-12));

    const FieldState back = transform(u, Direction::inverse);
    CHECK(max_abs_diff(back.values, u.values) <= 1e-12);
    const FieldState fwd = transform(back, Direction::forward);
    CHECK(max_abs_diff(fwd.coeffs, u.coeffs) <= 1e-12);
  }
}

TEST_CASE("constant field concentrates at the zero frequency") {
  for (int d : {1, 2}) {
    const GridSpec g = GridSpec::make(d, d == 1 ? 64 : 16, 5.0);
    const std::vector<cdouble> ones(
        static_cast<std::size_t>(g.point_count()), cdouble{1.0, 0.0});
    const FieldState u = microloc::state_from_values(g, ones);
    const std::size_t zero_idx =
        d == 1 ? static_cast<std::size_t>(g.n / 2)
               : static_cast<std::size_t>(g.n / 2) * g.n + g.n / 2;
    CHECK(u.coeffs[zero_idx].real() ==
          doctest::Approx(std::pow(2.0 * g.L, d)).epsilon(1e-12));
    for (std::size_t i = 0; i < u.coeffs.size(); ++i) {
      if (i != zero_idx) CHECK(std::abs(u.coeffs[i]) <= 1e-9);
    }
  }
}

TEST_CASE("circular shift multiplies the spectrum by a phase") {
  const GridSpec g = GridSpec::make(1, 128, 6.0);
  const auto vals = random_values(static_cast<std::size_t>(g.n), 99);
  const FieldState u = microloc::state_from_values(g, vals);

  const int cells = 5;
  const double a = cells * g.dx();
  std::vector<cdouble> shifted(vals.size());
  for (int j = 0; j < g.n; ++j) {
    shifted[static_cast<std::size_t>(j)] =
        vals[static_cast<std::size_t>((j - cells + g.n) % g.n)];
  }
  const FieldState v = microloc::state_from_values(g, shifted);
  for (int k = 0; k < g.n; ++k) {
    const cdouble phase = std::exp(cdouble{0.0, -a * g.xi_at(k)});
    CHECK(std::abs(v.coeffs[static_cast<std::size_t>(k)] -
                   phase * u.coeffs[static_cast<std::size_t>(k)]) <= 1e-9);
  }
}

TEST_CASE("norm kinds") {
  const GridSpec g = GridSpec::make(1, 256, 16.0 * microloc::kPi);
  const FieldState u = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);
  const double l2 = norm(u, NormKind::l2);
  const double h1 = norm(u, NormKind::h1);
  CHECK(l2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h1 <= std::sqrt(1.0 + 2.0 * 2.0) * l2 * (1.0 + 1e-12));
  CHECK(h1 >= std::sqrt(1.0 + 1.0) * l2 * (1.0 - 1e-12));
  CHECK(norm(u, NormKind::sup) >= l2 / std::sqrt(2.0 * g.L) * (1.0 - 1e-12));
}

TEST_CASE("multiplier algebra") {
  const GridSpec g = GridSpec::make(1, 256, 16.0 * microloc::kPi);
  const FieldState u = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);

  const auto identity = [](std::array<double, 2>) { return cdouble{1.0, 0.0}; };
  CHECK(max_abs_diff(apply_multiplier(identity, u).values, u.values) <= 1e-12);

  const auto inv_bracket = [](std::array<double, 2> xi) {
    return cdouble{1.0 / microloc::japanese_bracket(std::hypot(xi[0], xi[1])),
                   0.0};
  };
  const auto bracket = [](std::array<double, 2> xi) {
    return cdouble{microloc::japanese_bracket(std::hypot(xi[0], xi[1])), 0.0};
  };
  const FieldState round =
      apply_multiplier(bracket, apply_multiplier(inv_bracket, u));
  CHECK(max_abs_diff(round.values, u.values) <= 1e-12);

  const auto window = [](std::array<double, 2> xi) {
    const double r = std::hypot(xi[0], xi[1]);
    return cdouble{(r > 0.5 && r < 2.5) ? 1.0 : 0.0, 0.0};
  };
  CHECK(max_abs_diff(apply_multiplier(window, u).values, u.values) <= 1e-12);

  // m1 then m2 composes to the pointwise product.
  const auto m1 = [](std::array<double, 2> xi) {
    return std::exp(cdouble{0.0, 0.3 * xi[0]});
  };
  const auto m2 = [](std::array<double, 2> xi) {
    return cdouble{std::cos(xi[0]), 0.1};
  };
  const auto m12 = [&](std::array<double, 2> xi) { return m1(xi) * m2(xi); };
  const FieldState chained = apply_multiplier(m2, apply_multiplier(m1, u));
  const FieldState fused = apply_multiplier(m12, u);
  CHECK(max_abs_diff(chained.values, fused.values) <= 1e-12);

  // 1/|xi| is singular only at the origin: fine on annulus data, a numeric
  // error on a spectrum populating the origin.
  const auto singular = [](std::array<double, 2> xi) {
    return cdouble{1.0 / std::hypot(xi[0], xi[1]), 0.0};
  };
  CHECK_NOTHROW(apply_multiplier(singular, u));
  const GridSpec g2 = GridSpec::make(1, 512, 16.0 * microloc::kPi);
  const FieldState centered =
      synthesize_data(SpectralProfile::gaussian({0.0, 0.0}, 1.0), g2);
  CHECK(thrown_kind([&] { apply_multiplier(singular, centered); }) ==
        ErrorKind::numeric);
}

TEST_CASE("two-dimensional annulus synthesis is radial") {
  const GridSpec g = GridSpec::make(2, 128, 16.0 * microloc::kPi);
  const FieldState u = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);
  CHECK(norm(u, NormKind::l2) == doctest::Approx(1.0).epsilon(1e-12));
  // Reflection of either axis and axis swap leave the samples unchanged.
  const auto at = [&](int j1, int j2) {
    return u.values[static_cast<std::size_t>(j1) * g.n + j2];
  };
  for (int j1 = 1; j1 < g.n; j1 += 17) {
    for (int j2 = 1; j2 < g.n; j2 += 13) {
      CHECK(std::abs(at(j1, j2) - at(g.n - j1, j2)) <= 1e-12);
      CHECK(std::abs(at(j1, j2) - at(j2, j1)) <= 1e-12);
    }
  }
}

TEST_CASE("state serialization round-trips") {
  const GridSpec g = GridSpec::make(1, 256, 16.0 * microloc::kPi);
  const FieldState u = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);
  const std::string path = "field_state_roundtrip.bin";
  microloc::save_state(u, path);
  const FieldState v = microloc::load_state(path);
  std::remove(path.c_str());
  CHECK(v.grid == u.grid);
  CHECK(max_abs_diff(v.values, u.values) == 0.0);
  CHECK(max_abs_diff(v.coeffs, u.coeffs) <= 1e-12);
  CHECK(thrown_kind([] { microloc::load_state("missing_state.bin"); }) ==
        ErrorKind::io);
}
