// Exact spectral evolution e^{itP(|D|)}, the Klein-Gordon reduction to the
// half-wave equation, sup-norm decay studies, and the box policy that keeps
// outgoing waves away from the periodic wrap.
#pragma once

#include <span>
#include <vector>

#include "microloc/dispersion.hpp"
#include "microloc/field.hpp"

namespace microloc {

// True when P' or P'' blows up at the origin, in which case evolution
// requires data with no spectral mass at xi = 0.
bool singular_at_origin(const DispersionModel& model);

// Multiplies the spectrum by e^{itP(|xi|)}. The xi = 0 node uses the limit
// P(0+) (0 for the power-law and finite-depth kinds, 1 for half-KG); for
// singular kinds the data must carry < 1e-14 of its mass at that node.
FieldState evolve(const DispersionModel& model, const FieldState& u0,
                  double t);

struct KGState {
  FieldState w;   // position, real
  FieldState wt;  // velocity, real
  FieldState u;   // complex reduction u = <D>w - i wt
};

// Solves w_tt - Laplace(w) + w = 0 from real data (w0, w1) by evolving the
// reduction u0 = <D>w0 - i w1 under the half-KG flow.
KGState kg_evolve(const FieldState& w0, const FieldState& w1, double t);

// ||wt||_{L2}^2 + ||w||_{H1}^2, the conserved Klein-Gordon energy.
double kg_energy(const KGState& state);

// Largest |P'| over the radial spectral support of the profile.
double max_group_speed(const DispersionModel& model,
                       const SpectralProfile& profile);

// Box policy: L = max(1.5 (1 + |t| v_max), |t| v_max + tail cushion), where
// the cushion covers the synthesized data's spatial tail (32 pi / width for
// the annulus bump, 16 / width for a gaussian); n is the smallest power of
// two giving Nyquist headroom xi_max >= 2 * support radius. n beyond n_cap
// is a resolution error.
GridSpec choose_grid(const DispersionModel& model,
                     const SpectralProfile& profile, int d, double t,
                     int n_cap);

struct DecayRow {
  double t = 0.0;
  double sup_norm = 0.0;
  GridSpec grid;
  double wrap_mass = 0.0;
};

struct DecayStudy {
  std::vector<DecayRow> rows;
  double slope = 0.0;  // log-log fit over the top octave of t
};

// Evolves freshly synthesized data at each positive t (t = 0 entries are
// dropped) on per-t boxes and fits the sup-norm decay exponent over the top
// octave. A tripped wrap-around monitor is a box error.
DecayStudy dispersion_decay(const DispersionModel& model,
                            const SpectralProfile& profile, int d,
                            std::span<const double> t_list,
                            int n_cap = 4096);

}  // namespace microloc
