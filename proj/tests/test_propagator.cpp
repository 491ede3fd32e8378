#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "doctest.h"
#include "microloc/propagator.hpp"

using microloc::cdouble;
using microloc::DispersionModel;
using microloc::ErrorKind;
using microloc::FieldState;
using microloc::GridSpec;
using microloc::KGState;
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

double max_abs_diff(const std::vector<cdouble>& a,
                    const std::vector<cdouble>& b) {
  double peak = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    peak = std::max(peak, std::abs(a[i] - b[i]));
  }
  return peak;
}

FieldState annulus_state(int d = 1) {
  const GridSpec g =
      GridSpec::make(d, d == 1 ? 512 : 128, 32.0 * microloc::kPi);
  return synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);
}

}  // namespace

TEST_CASE("evolution at t = 0 is the identity") {
  const FieldState u0 = annulus_state();
  const FieldState ut = evolve(DispersionModel::schrodinger(), u0, 0.0);
  CHECK(max_abs_diff(ut.values, u0.values) <= 1e-14);
}

TEST_CASE("evolution is unitary for every model kind") {
  const FieldState u0 = annulus_state();
  const double base = norm(u0, NormKind::l2);
  for (const char* id : {"schrodinger", "gravity-ww", "capillary-ww",
                         "half-kg", "gravity-ww-h", "capillary-ww-h",
                         "fractional:1.7"}) {
    for (double t : {0.5, 17.3, -250.0}) {
      const FieldState ut = evolve(DispersionModel::from_id(id), u0, t);
      CHECK(norm(ut, NormKind::l2) == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("free-Schrodinger gaussian matches the closed-form spread") {
  // e^{-x^2/2} has L2 norm pi^{1/4}; the synthesized state then equals the
  // gaussian exactly up to spectral truncation ~ e^{-72}.
  const GridSpec g = GridSpec::make(1, 256, 32.0);
  const FieldState u0 = synthesize_data(
      SpectralProfile::gaussian({0.0, 0.0}, 1.0, std::pow(microloc::kPi, 0.25)),
      g);
  for (int j = 0; j < g.n; ++j) {
    const double x = g.x_at(j);
    CHECK(std::abs(u0.values[static_cast<std::size_t>(j)] -
                   std::exp(-0.5 * x * x)) <= 1e-10);
  }
  for (double t : {1.0, 4.0}) {
    const FieldState ut = evolve(DispersionModel::schrodinger(), u0, t);
    for (int j = 0; j < g.n; ++j) {
      const double x = g.x_at(j);
      const double predicted =
          std::exp(-x * x / (1.0 + t * t)) / std::sqrt(1.0 + t * t);
      CHECK(std::abs(std::norm(ut.values[static_cast<std::size_t>(j)]) -
                     predicted) <= 1e-8);
    }
  }
}

TEST_CASE("group law and multiplier commutation") {
  const FieldState u0 = annulus_state();
  const auto kg = DispersionModel::half_klein_gordon();
  const FieldState two_step = evolve(kg, evolve(kg, u0, 1.2), 2.3);
  const FieldState one_step = evolve(kg, u0, 3.5);
  CHECK(max_abs_diff(two_step.values, one_step.values) <= 1e-12);

  const microloc::Multiplier m = [](std::array<double, 2> xi) {
    const double r = std::hypot(xi[0], xi[1]);
    return std::exp(cdouble{0.0, 0.3 * xi[0]}) * (r < 1.7 ? 1.0 : 0.25);
  };
  const FieldState a = apply_multiplier(m, evolve(kg, u0, 5.0));
  const FieldState b = evolve(kg, apply_multiplier(m, u0), 5.0);
  CHECK(max_abs_diff(a.values, b.values) <= 1e-13);
}

TEST_CASE("singular models refuse spectra touching the origin") {
  const GridSpec g = GridSpec::make(1, 512, 16.0 * microloc::kPi);
  const FieldState centered =
      synthesize_data(SpectralProfile::gaussian({0.0, 0.0}, 1.0), g);
  CHECK(thrown_kind([&] {
          evolve(DispersionModel::gravity_ww(), centered, 1.0);
        }) == ErrorKind::domain);
  // Non-singular kinds evolve the same data without complaint.
  CHECK_NOTHROW(evolve(DispersionModel::schrodinger(), centered, 1.0));
  CHECK_NOTHROW(evolve(DispersionModel::half_klein_gordon(), centered, 1.0));

  CHECK(singular_at_origin(DispersionModel::gravity_ww()));
  CHECK(singular_at_origin(DispersionModel::capillary_ww()));
  CHECK(singular_at_origin(DispersionModel::fractional(0.5)));
  CHECK_FALSE(singular_at_origin(DispersionModel::schrodinger()));
  CHECK_FALSE(singular_at_origin(DispersionModel::half_klein_gordon()));
}

TEST_CASE("Klein-Gordon reduction: t = 0 reproduces the data") {
  const GridSpec g = GridSpec::make(1, 512, 32.0 * microloc::kPi);
  const FieldState w0 = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);
  const FieldState w1 =
      synthesize_data(SpectralProfile::annulus(0.5, 1.5), g);
  const KGState s0 = kg_evolve(w0, w1, 0.0);
  CHECK(max_abs_diff(s0.w.values, w0.values) <= 1e-12);
  CHECK(max_abs_diff(s0.wt.values, w1.values) <= 1e-12);
}

TEST_CASE("Klein-Gordon energy is conserved and equals the reduction mass") {
  const GridSpec g = GridSpec::make(1, 512, 32.0 * microloc::kPi);
  const FieldState w0 = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);
  const FieldState w1 =
      synthesize_data(SpectralProfile::annulus(0.5, 1.5), g);

  const double h1 = norm(w0, NormKind::h1);
  const double l2 = norm(w1, NormKind::l2);
  const double expected = h1 * h1 + l2 * l2;

  for (double t : {0.0, 1.0, 7.0, 23.0, 64.0}) {
    const KGState st = kg_evolve(w0, w1, t);
    CHECK(kg_energy(st) == doctest::Approx(expected).epsilon(1e-10));
    const double u_l2 = norm(st.u, NormKind::l2);
    CHECK(u_l2 * u_l2 == doctest::Approx(expected).epsilon(1e-10));
    // Reality preservation.
    double imag_peak = 0.0;
    for (const cdouble& v : st.w.values) {
      imag_peak = std::max(imag_peak, std::abs(v.imag()));
    }
    for (const cdouble& v : st.wt.values) {
      imag_peak = std::max(imag_peak, std::abs(v.imag()));
    }
    CHECK(imag_peak <= 1e-10);
  }
}

TEST_CASE("single-mode Klein-Gordon oscillates at the bracket frequency") {
  // One grid-exact mode xi0: w(t, x) = cos(<xi0> t) cos(xi0 x) solves the
  // mode ODE w'' + (1 + xi0^2) w = 0.
  const GridSpec g = GridSpec::make(1, 64, 8.0);
  const double xi0 = microloc::kPi;  // storage mode k0 = 8
  std::vector<cdouble> w0_vals(static_cast<std::size_t>(g.n));
  std::vector<cdouble> w1_vals(static_cast<std::size_t>(g.n), cdouble{});
  for (int j = 0; j < g.n; ++j) {
    w0_vals[static_cast<std::size_t>(j)] = std::cos(xi0 * g.x_at(j));
  }
  const FieldState w0 = microloc::state_from_values(g, w0_vals);
  const FieldState w1 = microloc::state_from_values(g, w1_vals);
  const double omega = std::sqrt(1.0 + xi0 * xi0);
  for (double t : {0.7, 2.0}) {
    const KGState st = kg_evolve(w0, w1, t);
    for (int j = 0; j < g.n; ++j) {
      const double predicted = std::cos(omega * t) * std::cos(xi0 * g.x_at(j));
      CHECK(std::abs(st.w.values[static_cast<std::size_t>(j)] - predicted) <=
            1e-10);
    }
  }
}

TEST_CASE("velocity field is the time derivative of the position field") {
  const GridSpec g = GridSpec::make(1, 512, 32.0 * microloc::kPi);
  const FieldState w0 = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);
  const FieldState w1 =
      synthesize_data(SpectralProfile::annulus(0.5, 1.5), g);
  const double t = 3.0;
  const double h = 1e-3;
  const KGState mid = kg_evolve(w0, w1, t);
  const KGState up = kg_evolve(w0, w1, t + h);
  const KGState dn = kg_evolve(w0, w1, t - h);
  double peak = 0.0;
  for (std::size_t i = 0; i < mid.w.values.size(); ++i) {
    const cdouble fd = (up.w.values[i] - dn.w.values[i]) / (2.0 * h);
    peak = std::max(peak, std::abs(fd - mid.wt.values[i]));
  }
  CHECK(peak <= 1e-5);
}

TEST_CASE("kg_evolve validates reality") {
  const GridSpec g = GridSpec::make(1, 512, 32.0 * microloc::kPi);
  const FieldState w0 = synthesize_data(SpectralProfile::annulus(1.0, 2.0), g);
  const FieldState complex_data =
      evolve(DispersionModel::schrodinger(), w0, 0.3);
  CHECK(thrown_kind([&] { kg_evolve(complex_data, w0, 1.0); }) ==
        ErrorKind::domain);
}

TEST_CASE("box policy tracks the group speed") {
  const auto profile = SpectralProfile::annulus(1.0, 2.0);
  const auto kg = DispersionModel::half_klein_gordon();
  CHECK(microloc::max_group_speed(kg, profile) ==
        doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-6));
  const GridSpec small = choose_grid(kg, profile, 1, 1.0, 4096);
  const GridSpec large = choose_grid(kg, profile, 1, 200.0, 4096);
  CHECK(large.L > small.L);
  CHECK(large.L >= 200.0 * 2.0 / std::sqrt(5.0));
  CHECK(large.xi_max() >= 4.0);
  CHECK(thrown_kind([&] { choose_grid(kg, profile, 1, 200.0, 256); }) ==
        ErrorKind::resolution);
}

TEST_CASE("sup-norm decay matches the dispersive rate") {
  SUBCASE("half-KG in dimension one decays like t^{-1/2}") {
    // The sup-norm needs t * inf P'' >> 1 before the stationary-phase rate
    // shows; for the [1, 2] annulus that means t in the hundreds.
    const std::vector<double> times = {0.0,   256.0, 384.0,
                                       512.0, 768.0, 1024.0};
    const auto study = dispersion_decay(DispersionModel::half_klein_gordon(),
                                        SpectralProfile::annulus(1.0, 2.0), 1,
                                        times);
    CHECK(study.rows.size() == 5);  // the t = 0 row is dropped
    CHECK(study.rows.front().t == 256.0);
    CHECK(study.slope > -0.6);
    CHECK(study.slope < -0.4);
    for (const auto& row : study.rows) CHECK(row.wrap_mass < 1e-6);
  }
  SUBCASE("Schrodinger in dimension two decays like t^{-1}") {
    const std::vector<double> times = {40.0, 80.0, 120.0, 160.0};
    const auto study = dispersion_decay(DispersionModel::schrodinger(),
                                        SpectralProfile::annulus(1.0, 2.0), 2,
                                        times, 2048);
    CHECK(study.slope > -1.15);
    CHECK(study.slope < -0.85);
  }
  SUBCASE("profiles touching the origin are rejected") {
    const std::vector<double> times = {2.0, 4.0};
    CHECK(thrown_kind([&] {
            dispersion_decay(DispersionModel::schrodinger(),
                             SpectralProfile::gaussian({0.0, 0.0}, 1.0), 1,
                             times);
          }) == ErrorKind::domain);
  }
}
