#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "doctest.h"
#include "microloc/dispersion.hpp"

using microloc::DispersionModel;
using microloc::ErrorKind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
std::optional<ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const microloc::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Independent oracle: solve P'(rho) = r for half-KG by bisection on the
// analytic velocity rho/sqrt(1+rho^2), never calling invert_velocity.
double half_kg_inverse_oracle(double r) {
  double lo = 0.0, hi = 1e8;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double v = mid / std::sqrt(1.0 + mid * mid);
    (v < r ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double central_diff(const DispersionModel& m, double rho, int order,
                    double step) {
  const double up = microloc::eval_derivatives(m, rho + step, order - 1);
  const double dn = microloc::eval_derivatives(m, rho - step, order - 1);
  return (up - dn) / (2.0 * step);
}

}  // namespace

TEST_CASE("closed-form derivatives at spot-check points") {
  const auto schrod = DispersionModel::schrodinger();
  CHECK(microloc::eval_derivatives(schrod, 2.0, 1) == doctest::Approx(2.0));
  CHECK(microloc::eval_derivatives(schrod, 2.0, 0) == doctest::Approx(2.0));
  CHECK(microloc::eval_derivatives(schrod, 2.0, 2) == doctest::Approx(1.0));

  const auto kg = DispersionModel::half_klein_gordon();
  CHECK(microloc::eval_derivatives(kg, 1.0, 1) ==
        doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(microloc::eval_derivatives(kg, 1e-9, 1) == doctest::Approx(0.0));
  CHECK(microloc::eval_derivatives(kg, 1e9, 1) == doctest::Approx(1.0));
  CHECK(microloc::eval_derivatives(kg, 0.5, 0) ==
        doctest::Approx(std::sqrt(1.25)));

  const auto gravity = DispersionModel::gravity_ww();
  CHECK(microloc::eval_derivatives(gravity, 4.0, 1) == doctest::Approx(0.5));
  CHECK(microloc::eval_derivatives(gravity, 4.0, 2) ==
        doctest::Approx(-0.0625));

  const auto capillary = DispersionModel::capillary_ww();
  CHECK(microloc::eval_derivatives(capillary, 4.0, 1) == doctest::Approx(2.0));
}

TEST_CASE("derivative orders are consistent under central differences") {
  const DispersionModel models[] = {
      DispersionModel::half_klein_gordon(),
      DispersionModel::gravity_ww(),
      DispersionModel::capillary_ww(),
      DispersionModel::gravity_ww_depth(1.0),
      DispersionModel::capillary_ww_depth(1.0),
      DispersionModel::fractional(1.7),
  };
  const double rhos[] = {0.3, 0.9, 2.7};
  for (const auto& m : models) {
    for (double rho : rhos) {
      for (int order = 1; order <= 2; ++order) {
        const double exact = microloc::eval_derivatives(m, rho, order);
        const double approx = central_diff(m, rho, order, 1e-5 * rho);
        CHECK(approx == doctest::Approx(exact).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("group-velocity inversion matches closed forms and oracles") {
  const auto kg = DispersionModel::half_klein_gordon();
  CHECK(microloc::invert_velocity(kg, 1.2) == kInf);
  CHECK(microloc::invert_velocity(kg, 1.0) == kInf);
  // Frozen: rho/sqrt(1+rho^2) = 0.6 has the exact solution 0.75.
  CHECK(microloc::invert_velocity(kg, 0.6) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(half_kg_inverse_oracle(0.6) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(microloc::invert_velocity(kg, 0.0) == doctest::Approx(0.0));

  const auto schrod = DispersionModel::schrodinger();
  CHECK(microloc::invert_velocity(schrod, 3.5) == doctest::Approx(3.5));

  const auto gravity = DispersionModel::gravity_ww();
  CHECK(microloc::invert_velocity(gravity, 0.0) == kInf);
  CHECK(microloc::invert_velocity(gravity, 0.5) == doctest::Approx(4.0));

  const auto capillary = DispersionModel::capillary_ww();
  CHECK(microloc::invert_velocity(capillary, 0.0) == doctest::Approx(0.0));
  CHECK(microloc::invert_velocity(capillary, 3.0) == doctest::Approx(9.0));

  CHECK(thrown_kind([] {
          microloc::invert_velocity(DispersionModel::gravity_ww_depth(1.0),
                                    0.3);
        }) == ErrorKind::domain);
}

TEST_CASE("inversion round-trips the velocity on the grid interior") {
  const DispersionModel models[] = {
      DispersionModel::schrodinger(),
      DispersionModel::gravity_ww(),
      DispersionModel::capillary_ww(),
      DispersionModel::half_klein_gordon(),
      DispersionModel::capillary_ww_depth(1.0),
      DispersionModel::capillary_ww_depth(0.4),
      DispersionModel::fractional(-0.25),
  };
  for (const auto& m : models) {
    for (double rho : microloc::log_grid(1e-2, 1e2, 25)) {
      const double r = microloc::eval_derivatives(m, rho, 1);
      const double back = microloc::invert_velocity(m, r);
      CHECK(back == doctest::Approx(rho).epsilon(1e-10));
    }
  }
}

TEST_CASE("hypothesis checker accepts the fractional-type families") {
  const auto grid = microloc::log_grid(1e-3, 1e3, 61);

  for (const char* id : {"schrodinger", "gravity-ww", "capillary-ww",
                         "half-kg", "capillary-ww-h", "fractional:2"}) {
    const auto rep =
        microloc::verify_hypothesis(DispersionModel::from_id(id), grid);
    INFO("model ", id, ": ", rep.detail);
    CHECK(rep.pass);
    CHECK(rep.monotone);
    CHECK(rep.curvature_sign_constant);
  }

  SUBCASE("pure power laws sit at ratio exactly one") {
    const auto rep =
        microloc::verify_hypothesis(DispersionModel::gravity_ww(), grid);
    CHECK(rep.low_velocity.min == doctest::Approx(1.0));
    CHECK(rep.low_velocity.max == doctest::Approx(1.0));
    CHECK(rep.high_velocity.max == doctest::Approx(1.0));
    CHECK(rep.high_curvature.max == doctest::Approx(0.5));
  }

  SUBCASE("half-KG ratios approach the expansion coefficients") {
    const auto rep = microloc::verify_hypothesis(
        DispersionModel::half_klein_gordon(), grid);
    // 1 - P'(rho) = 1/(2 rho^2) + O(rho^-4) at high frequency.
    CHECK(rep.high_velocity.min == doctest::Approx(0.5).epsilon(0.01));
    CHECK(rep.low_velocity.max == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("hypothesis checker rejects the non-monotone finite-depth model") {
  const auto grid = microloc::log_grid(1e-3, 1e3, 61);
  const auto rep = microloc::verify_hypothesis(
      DispersionModel::gravity_ww_depth(1.0), grid);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.monotone);
  CHECK(std::isfinite(rep.offending_rho));
  CHECK_FALSE(rep.detail.empty());
}

TEST_CASE("hypothesis checker validates its grid") {
  const auto m = DispersionModel::schrodinger();
  CHECK(thrown_kind([&] {
          microloc::verify_hypothesis(m, microloc::log_grid(1e-2, 1e3, 61));
        }) == ErrorKind::usage);
  CHECK(thrown_kind([&] {
          microloc::verify_hypothesis(m, microloc::log_grid(1e-3, 1e2, 61));
        }) == ErrorKind::usage);
  const double unsorted[] = {1e-3, 2.0, 1.0, 1e3, 1e3 * 2, 1e4, 1e4 * 2,
                             1e5,  1e5 * 2, 1e6, 1e6 * 2, 1e7};
  CHECK(thrown_kind([&] { microloc::verify_hypothesis(m, unsorted); }) ==
        ErrorKind::usage);
}

TEST_CASE("window-exponent bounds in the mixed-decay regime") {
  const auto kg_bounds =
      microloc::epsilon_bounds(DispersionModel::half_klein_gordon());
  CHECK(kg_bounds.eps0_max == doctest::Approx(0.5));
  CHECK(kg_bounds.eps1_max == doctest::Approx(1.0));

  const auto shallow = microloc::epsilon_bounds(
      DispersionModel::custom(nullptr, 3.0, 0.0, -0.5, 1.0, +1));
  CHECK(shallow.eps0_max == doctest::Approx(0.25));
  CHECK(shallow.eps1_max == kInf);

  const auto steep = microloc::epsilon_bounds(
      DispersionModel::custom(nullptr, 1.0, 0.0, -3.0, 1.0, +1));
  CHECK(steep.eps0_max == doctest::Approx(0.5));
  CHECK(steep.eps1_max == doctest::Approx(0.5));

  CHECK(thrown_kind([] {
          microloc::epsilon_bounds(DispersionModel::schrodinger());
        }) == ErrorKind::regime);
}

TEST_CASE("domain and usage errors") {
  const auto kg = DispersionModel::half_klein_gordon();
  CHECK(thrown_kind([&] { microloc::eval_derivatives(kg, 0.0, 1); }) ==
        ErrorKind::domain);
  CHECK(thrown_kind([&] { microloc::eval_derivatives(kg, -1.0, 0); }) ==
        ErrorKind::domain);
  CHECK(thrown_kind([&] { microloc::eval_derivatives(kg, 1.0, 3); }) ==
        ErrorKind::usage);
  CHECK(thrown_kind([] { DispersionModel::fractional(0.0); }) ==
        ErrorKind::usage);
  CHECK(thrown_kind([] { DispersionModel::from_id("airy"); }) ==
        ErrorKind::usage);
  CHECK(thrown_kind([] { DispersionModel::from_id("fractional:abc"); }) ==
        ErrorKind::usage);
  CHECK(thrown_kind([] { DispersionModel::gravity_ww_depth(0.0); }) ==
        ErrorKind::usage);
}

TEST_CASE("model ids round-trip") {
  for (const char* id : {"schrodinger", "gravity-ww", "capillary-ww",
                         "gravity-ww-h", "capillary-ww-h", "half-kg"}) {
    CHECK(DispersionModel::from_id(id).id() == id);
  }
  const auto frac = DispersionModel::from_id("fractional:0.5");
  CHECK(frac.id() == "fractional:0.5");
  CHECK(frac.p == doctest::Approx(0.5));
  CHECK(DispersionModel::from_id("capillary-ww-h", 2.5).h ==
        doctest::Approx(2.5));
}

TEST_CASE("log grid spans its endpoints geometrically") {
  const auto g = microloc::log_grid(1e-3, 1e3, 13);
  CHECK(g.size() == 13);
  CHECK(g.front() == 1e-3);
  CHECK(g.back() == 1e3);
  CHECK(g[6] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
  }
}
