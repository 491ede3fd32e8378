// Long-time limit predictions for the truncated energies: classification of
// the spread exponent into the three limit regimes, the critical-case
// asymptotic density G evaluated by two independent quadrature routes (a
// stationary-point Fresnel integral and a Fourier-side phase integral over a
// cached cutoff transform), the degenerate-exponent constant c0, the
// half-space route available for rough cutoffs under the quadratic model,
// and the sharp spectral-window energies of the classical Klein-Gordon
// partition.
#pragma once

#include <array>
#include <functional>
#include <string>

#include "microloc/common.hpp"
#include "microloc/dispersion.hpp"
#include "microloc/field.hpp"
#include "microloc/quantize.hpp"

namespace microloc {

enum class Regime { subcritical, critical, supercritical };

std::string regime_id(Regime regime);

// Classifies by the effective spread exponent: delta for most variants,
// delta + sigma1/2 for the alternative symbol. Exponents >= 1/2 are outside
// every limit law and raise ErrorKind::regime; the spec must be valid.
Regime regime_of(const SymbolSpec& spec);

// A quadrature result with its refinement-based error estimate. `flagged`
// is set when the estimate exceeds 1e-4 of the value, i.e. when the digits
// the limit predictions are tested against cannot be trusted.
struct QuadEstimate {
  double value = 0.0;
  double err_estimate = 0.0;
  bool flagged = false;
};

// Asymptotic energy density at radial frequency rho for the critical regime,
// evaluated as the half-line x hyperplane Fresnel integral in stationary
// coordinates. The cutoff must be radial (every CutoffSpec is); the weight
// fields (lambda1, sigma1) enter through the envelope normalisation
// lambda1 rho^{sigma1}, which is identically 1 at their defaults. Compactly
// supported cutoffs integrate over their support; the gaussian integrates
// along the rotated ray where the oscillation turns into decay. Requires
// rho > 0, P'(rho) > 0, and nonvanishing curvature P''(rho).
QuadEstimate g_chi_direct(const DispersionModel& model,
                          const CutoffSpec& cutoff, double rho, int dim);

// The same density through the Fourier-side formula
//   G = 1/4 (2pi)^{-2d} | int exp(i (P'' rho xi_1^2 + P' |xi'|^2)
//                                 / (2 rho w^2)) chihat(xi) dxi |^2,
// with w = lambda1 rho^{sigma1}, quadrature running over a cached radial
// transform of the cutoff. The sign of P'' rides in the phase. Errors with
// ErrorKind::resolution when the cached transform leaves more than 1e-8 of
// its mass in the trailing tenth of the grid.
QuadEstimate g_chi_radial(const DispersionModel& model,
                          const CutoffSpec& cutoff, double rho, int dim);

// The frequency-independent value the critical limit collapses to when the
// phase exponent degenerates (group speed a pure power rho^p with
// p = 2 sigma1 + 1):
//   c0 = | (2 (2pi)^d)^{-1} int exp(i (p xi_1^2 + |xi'|^2) / 2) chihat |^2.
QuadEstimate c0_value(const CutoffSpec& cutoff, double p, int dim);

// Critical density for the quadratic model via the half-space integral
//   G = (2pi)^{-d} | int_{x . omega > 0} exp(i|x|^2/2) chi(x) dx |^2,
// which only needs chi integrable. The radial-profile overload accepts any
// profile (sharp indicators included) with its support radius; the CutoffSpec
// overload wraps chi_value. omega must be a unit vector (second component 0
// in dimension one); radial profiles make the result omega-independent.
QuadEstimate g_chi_schrodinger(const CutoffSpec& cutoff,
                               std::array<double, 2> omega, int dim);
QuadEstimate g_chi_schrodinger(const std::function<double(double)>& profile,
                               double support_radius,
                               std::array<double, 2> omega, int dim);

// L1 mass of the radial cutoff transform in dimension dim, the quantity
// behind the uniform bound G <= 1/4 (2pi)^{-2d} mass^2.
double chi_hat_l1_norm(const CutoffSpec& cutoff, int dim);

// The critical-regime limit of the truncated energy:
//   (2pi)^{-d} int G(rho) |u0hat(rho omega)|^2 rho^{d-1} drho domega,
// computed by weighting the Fourier-route density against the discrete
// spectrum of u0. The spectrum must be supported away from xi = 0.
QuadEstimate critical_limit_integral(const DispersionModel& model,
                                     const CutoffSpec& cutoff,
                                     const FieldState& u0);

// Scope screen for the enveloped-symbol limit laws: the plain envelope
// tracks group speeds that vanish or diverge at high frequency, so a speed
// tending to a positive constant (P1 > 0) must take the modified or
// alternative symbol. Raises ErrorKind::hypothesis.
void require_limit_scope(const SymbolSpec& spec);

enum class PredictionRoute { closed_form, direct_quadrature, radial_fourier };

struct LimitPrediction {
  Regime regime = Regime::critical;
  double value = 0.0;
  PredictionRoute route = PredictionRoute::closed_form;
  double err_estimate = 0.0;
  bool flagged = false;
};

// Predicted limit of ||Op(a(t)) u(t)||^2 for t -> +-infinity: 0 below the
// critical exponent, the critical integral at it, a quarter of the squared
// mass above it. Supports the enveloped variants (plain, modified,
// alternative); the bare indicator and the Klein-Gordon forms have no
// single-field limit law here and raise ErrorKind::usage (the Klein-Gordon
// prediction is the window energy of the data pair at full spectrum).
LimitPrediction predict_limit(const SymbolSpec& spec, const FieldState& u0);

// A speed band ]r0, r1[ pulled back to the frequency band ]rho0, rho1[
// through the group speed. Bands beyond the reachable speeds pull back to
// +infinity; decreasing group speeds swap the endpoints so rho0 < rho1
// always holds for nonempty pullbacks.
struct SpectralWindow {
  double r0 = 0.0;
  double r1 = 0.0;
  double rho0 = 0.0;
  double rho1 = 0.0;
};

SpectralWindow spectral_window(const DispersionModel& model, double r0,
                               double r1);

// Energy the classical Klein-Gordon partition assigns to a speed band:
// the sharp projector onto rho0 < |xi| < rho1 applied to both data fields,
// squared H1 norm of the position datum plus squared L2 norm of the
// velocity datum. Both fields must be real and share one grid.
double kg_window_energy(const FieldState& w0, const FieldState& w1,
                        const SpectralWindow& window);

}  // namespace microloc
