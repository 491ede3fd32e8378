// Convergence-study orchestration: truncated energies against their
// predicted limits, Klein-Gordon microlocal and classical energy partitions,
// asymptotic velocity profiles, and operator-norm sweeps. Reports persist as
// CSV plus a sibling JSON metadata file.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "microloc/common.hpp"
#include "microloc/dispersion.hpp"
#include "microloc/field.hpp"
#include "microloc/quantize.hpp"

namespace microloc {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kReportFormat = 1;

// Geometric schedule t_min * ratio^i for i in [0, count).
struct TimeSchedule {
  double t_min = 4.0;
  double ratio = 2.0;
  int count = 7;

  // Validated, strictly increasing list of positive times.
  std::vector<double> times() const;
};

// Grid selection per row: the box rule of choose_grid with the box length
// stretched by `margin` (node count scaled to keep the frequency reach) and
// the node count then multiplied by `refine` (the discretization guard used
// by tests). n_cap = 0 picks the default cap: 4096 in dimension one, 128 in
// dimension two; the cap applies before refinement.
struct GridPolicy {
  double margin = 1.0;
  int refine = 1;
  int n_cap = 0;
};

// Bounded velocity observables g for the asymptotic-profile study:
// a smooth plateau over the speed band [r0, r1], a unit gaussian of the
// given width, or the constant one.
enum class ProfileObservable { smoothed_indicator, gaussian, constant };

std::string observable_id(ProfileObservable observable);
ProfileObservable observable_from_id(const std::string& id);

struct ExperimentConfig {
  std::string id = "study";
  SymbolSpec spec;
  SpectralProfile data = SpectralProfile::annulus(1.0, 2.0);
  int dim = 1;
  TimeSchedule schedule;
  GridPolicy grid;
  std::uint64_t seed = 1;
  bool deterministic = true;  // report wall time as zero for byte-stable files
  double tolerance = 0.10;    // relative band on the final rows

  // Klein-Gordon studies: velocity data w1 (optional) and the speed window
  // of the classical partition.
  SpectralProfile data_w1 = SpectralProfile::annulus(0.5, 1.5, 0.7);
  bool with_w1 = true;
  double r0 = 0.3;
  double r1 = 0.7;

  // Asymptotic-profile study.
  ProfileObservable observable = ProfileObservable::smoothed_indicator;
  double observable_r0 = 0.8;
  double observable_r1 = 2.5;
  double observable_width = 1.0;

  // Operator-norm sweep.
  int power_iters = 640;
};

struct ReportRow {
  double t = 0.0;
  double measured = 0.0;
  double predicted = 0.0;
  double rel_error = 0.0;  // |measured - predicted| / max(predicted, 1e-30)
  int n = 0;
  double L = 0.0;
  double wrap_mass = 0.0;
};

struct ConvergenceReport {
  std::string id;
  std::vector<ReportRow> rows;       // accepted rows, ascending in t
  std::vector<std::string> skipped;  // one reason per dropped schedule entry
  std::map<std::string, std::string> echo;  // effective config, dotted keys
  double wall_seconds = 0.0;
  bool pass = false;
  std::string verdict;
  // Study-specific log-log fit: discrepancy over the top octave for the
  // profile study, norm against t for the operator sweep; zero elsewhere.
  double slope = 0.0;
  double spread_ratio = 0.0;      // max/min measured (operator sweep)
  bool tail_decreasing = false;   // last three rows improve monotonically
};

// The effective configuration as dotted keys (the replay contract: feeding
// these back through the CLI reproduces the run).
std::map<std::string, std::string> echo_config(const ExperimentConfig& config);

// Truncated energy against the regime limit at each scheduled time and its
// negation (the limit laws hold for either time sign on its own). Rows that
// violate the box rule, exceed the node cap, or trip the wraparound monitor
// (mass beyond 1e-6) are skipped with a reason.
ConvergenceReport run_convergence_study(const ExperimentConfig& config);

// Three-term truncated Klein-Gordon energy with the kg symbol against the
// quarter of the conserved energy split ||w0||_H1^2 + ||w1||_L2^2.
ConvergenceReport run_kg_microlocal(const ExperimentConfig& config);

// Physical-space Klein-Gordon energy on the moving shell r0 < |x/t| < r1
// against the spectral window energy pulled back through the group speed.
// Windows at or beyond speed one predict zero (the light-cone residual).
ConvergenceReport run_kg_classical(const ExperimentConfig& config);

// L2 discrepancy between g(x/t) u(t) and the multiplier g applied at the
// group velocity. PASS needs the final row under 0.05 ||u0|| with an
// improving tail; `slope` fits the top octave.
ConvergenceReport run_asymptotic_profile(const ExperimentConfig& config);

// Operator-norm sweep by power iteration. Indicator variants PASS when the
// sweep stays within ratio 3 and |slope| <= 0.05; the plain variant checks
// the L1-scaling slope <= delta * dim + 0.05. The predicted column carries
// the first accepted row's value as the ratio baseline. Flagged
// power-iteration rows are skipped with their flag reason.
ConvergenceReport run_opnorm_sweep(const ExperimentConfig& config);

// CSV at `path` (header t,measured,predicted,rel_error,n,L,wrap_mass; 17
// significant digits; '\n' line ends) plus JSON metadata at the same path
// with extension swapped to .json. Byte-identical for equal config and seed
// when the config is deterministic.
void write_report(const ConvergenceReport& report, const std::string& path);

}  // namespace microloc
