#include "microloc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <utility>

#include "json.hpp"
#include "microloc/limits.hpp"
#include "microloc/linear_fit.hpp"
#include "microloc/parallel.hpp"
#include "microloc/propagator.hpp"
#include "microloc/windows.hpp"

namespace microloc {
namespace {

constexpr double kWrapLimit = 1e-6;

double rel_gap(double measured, double predicted) {
  return std::abs(measured - predicted) / std::max(predicted, 1e-30);
}

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

void require_dim(int dim) {
  if (dim != 1 && dim != 2) {
    fail(ErrorKind::usage, "dimension must be 1 or 2");
  }
}

void require_policy(const GridPolicy& policy) {
  if (!std::isfinite(policy.margin) || policy.margin < 1.0) {
    fail(ErrorKind::usage, "grid margin must be a finite factor >= 1");
  }
  if (policy.refine < 1) {
    fail(ErrorKind::usage, "grid refinement factor must be at least 1");
  }
  if (policy.n_cap < 0) {
    fail(ErrorKind::usage, "grid node cap must be nonnegative");
  }
}

int cap_of(const GridPolicy& policy, int dim) {
  if (policy.n_cap > 0) return policy.n_cap;
  return dim == 1 ? 4096 : 128;
}

int next_pow2(double at_least) {
  int n = 1;
  while (n < at_least) {
    if (n > (1 << 29)) fail(ErrorKind::resolution, "grid size overflow");
    n *= 2;
  }
  return n;
}

// choose_grid for the box rule, then the policy adjustments: the margin
// stretches the box with the node count scaled to keep the frequency reach
// (capped like the base choice), and the refinement factor multiplies the
// node count afterwards, exempt from the cap.
GridSpec policy_grid(const DispersionModel& model, const SpectralProfile& data,
                     int dim, double t, const GridPolicy& policy) {
  const int cap = cap_of(policy, dim);
  GridSpec base = choose_grid(model, data, dim, std::abs(t), cap);
  double L = base.L;
  int n = base.n;
  if (policy.margin > 1.0) {
    L = policy.margin * base.L;
    n = next_pow2(base.n * policy.margin);
    if (n > cap) {
      fail(ErrorKind::resolution,
           "grid margin pushes the node count past the cap " +
               std::to_string(cap));
    }
  }
  n *= policy.refine;
  return GridSpec::make(dim, n, L);
}

// Shared grid for a Klein-Gordon data pair: box and reach large enough for
// both profiles.
GridSpec merged_grid(const DispersionModel& model, const ExperimentConfig& c,
                     double t) {
  GridSpec g0 = policy_grid(model, c.data, c.dim, t, c.grid);
  if (!c.with_w1) return g0;
  GridSpec g1 = policy_grid(model, c.data_w1, c.dim, t, c.grid);
  if (g1 == g0) return g0;
  const double L = std::max(g0.L, g1.L);
  const double reach = std::max(g0.xi_max(), g1.xi_max());
  const int n = next_pow2(2.0 * L * reach / kPi);
  const int cap = cap_of(c.grid, c.dim) * c.grid.refine;
  if (n > cap) {
    fail(ErrorKind::resolution,
         "the shared grid for the data pair needs " + std::to_string(n) +
             " nodes per axis, beyond the configured cap of " +
             std::to_string(cap));
  }
  return GridSpec::make(c.dim, n, L);
}

FieldState zero_state(const GridSpec& grid) {
  return state_from_values(
      grid, std::vector<cdouble>(static_cast<std::size_t>(grid.point_count())));
}

struct RowOutcome {
  std::optional<ReportRow> row;
  std::string skip;
};

// Runs one worker per scheduled time; grid and wrap-around trouble
// (resolution, box, tripped monitor) turns into a skip reason, anything else
// propagates. Assembly in index order keeps rows ascending in t.
template <class Worker>
void fill_rows(const std::vector<double>& ts, ConvergenceReport& report,
               Worker&& worker) {
  std::vector<RowOutcome> out(ts.size());
  parallel_for(static_cast<std::int64_t>(ts.size()), [&](std::int64_t i) {
    try {
      out[static_cast<std::size_t>(i)] = worker(ts[static_cast<std::size_t>(i)]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::resolution && e.kind() != ErrorKind::box) {
        throw;
      }
      out[static_cast<std::size_t>(i)].skip =
          "t=" + format_short(ts[static_cast<std::size_t>(i)]) + ": " +
          e.what();
    }
  });
  for (auto& o : out) {
    if (o.row) {
      report.rows.push_back(*o.row);
    } else {
      report.skipped.push_back(o.skip);
    }
  }
}

RowOutcome skip_row(double t, const std::string& why) {
  RowOutcome o;
  o.skip = "t=" + format_short(t) + ": " + why;
  return o;
}

// Non-increasing relative errors across the last three accepted rows (two
// when only two exist); identically converged tails (ties, zeros) count.
bool tail_ok(const std::vector<ReportRow>& rows) {
  if (rows.size() < 2) return false;
  const std::size_t take = std::min<std::size_t>(3, rows.size());
  for (std::size_t i = rows.size() - take; i + 1 < rows.size(); ++i) {
    if (rows[i + 1].rel_error > rows[i].rel_error) return false;
  }
  return true;
}

double elapsed_or_zero(std::chrono::steady_clock::time_point start,
                       bool deterministic) {
  if (deterministic) return 0.0;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string profile_kind_id(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::annulus_bump:
      return "annulus";
    case ProfileKind::gaussian:
      return "gaussian";
    case ProfileKind::custom:
      return "custom";
  }
  return "custom";
}

void echo_profile(std::map<std::string, std::string>& echo,
                  const std::string& prefix, const SpectralProfile& data) {
  echo[prefix + ".kind"] = profile_kind_id(data.kind);
  echo[prefix + ".rho_a"] = format_g(data.rho_a);
  echo[prefix + ".rho_b"] = format_g(data.rho_b);
  echo[prefix + ".center0"] = format_g(data.center[0]);
  echo[prefix + ".center1"] = format_g(data.center[1]);
  echo[prefix + ".width"] = format_g(data.width);
  echo[prefix + ".norm"] = format_g(data.target_norm);
}

// Group speed at a spectral node, with the origin filled by its limit
// (infinite for kinds singular there, where the data carries no mass).
double speed_at(const DispersionModel& model, double rho) {
  if (rho > 0.0) return std::abs(eval_derivatives(model, rho, 1));
  if (model.p0 < 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(model.P0);
}

double observable_value(const ExperimentConfig& c, double v) {
  switch (c.observable) {
    case ProfileObservable::smoothed_indicator: {
      const double s =
          (2.0 * v - c.observable_r0 - c.observable_r1) /
          (c.observable_r1 - c.observable_r0);
      return plateau_window(s);
    }
    case ProfileObservable::gaussian:
      return gaussian_window(v / c.observable_width);
    case ProfileObservable::constant:
      return 1.0;
  }
  fail(ErrorKind::usage, "unknown velocity observable");
}

// log-log fit of measured against t over rows with t above the octave floor;
// zero when fewer than two usable rows remain.
double octave_slope(const std::vector<ReportRow>& rows, double floor_t) {
  std::vector<double> lt;
  std::vector<double> lm;
  for (const auto& row : rows) {
    if (row.t >= floor_t && row.measured > 0.0) {
      lt.push_back(std::log(row.t));
      lm.push_back(std::log(row.measured));
    }
  }
  if (lt.size() < 2) return 0.0;
  return fit_line(lt, lm).slope;
}

void require_half_kg(const ExperimentConfig& config) {
  if (config.spec.model.kind != ModelKind::half_klein_gordon) {
    fail(ErrorKind::hypothesis,
         "Klein-Gordon studies evolve w_tt - Lap(w) + w = 0; the symbol "
         "model must be half-kg");
  }
}

}  // namespace

std::vector<double> TimeSchedule::times() const {
  if (!std::isfinite(t_min) || t_min <= 0.0) {
    fail(ErrorKind::usage, "schedule start time must be positive and finite");
  }
  if (!std::isfinite(ratio) || ratio <= 1.0) {
    fail(ErrorKind::usage, "schedule ratio must exceed 1");
  }
  if (count < 1 || count > 64) {
    fail(ErrorKind::usage, "schedule length must lie in [1, 64]");
  }
  std::vector<double> ts(static_cast<std::size_t>(count));
  double t = t_min;
  for (auto& v : ts) {
    v = t;
    t *= ratio;
  }
  return ts;
}

std::string observable_id(ProfileObservable observable) {
  switch (observable) {
    case ProfileObservable::smoothed_indicator:
      return "smoothed-indicator";
    case ProfileObservable::gaussian:
      return "gaussian";
    case ProfileObservable::constant:
      return "constant";
  }
  return "constant";
}

ProfileObservable observable_from_id(const std::string& id) {
  if (id == "smoothed-indicator") return ProfileObservable::smoothed_indicator;
  if (id == "gaussian") return ProfileObservable::gaussian;
  if (id == "constant") return ProfileObservable::constant;
  fail(ErrorKind::usage, "unknown velocity observable: " + id);
}

std::map<std::string, std::string> echo_config(const ExperimentConfig& c) {
  std::map<std::string, std::string> echo;
  echo["id"] = c.id;
  echo["model"] = c.spec.model.id();
  echo["model.depth"] = format_g(c.spec.model.h);
  echo["variant"] = variant_id(c.spec.variant);
  echo["cutoff.chi"] = c.spec.cutoff.chi == ChiKind::bump ? "bump" : "gaussian";
  echo["cutoff.chi_scale"] = format_g(c.spec.cutoff.chi_scale);
  echo["cutoff.delta"] = format_g(c.spec.cutoff.delta);
  echo["cutoff.sigma0"] = format_g(c.spec.cutoff.sigma0);
  echo["cutoff.sigma1"] = format_g(c.spec.cutoff.sigma1);
  echo["cutoff.lambda1"] = format_g(c.spec.cutoff.lambda1);
  echo["cutoff.eps0"] = format_g(c.spec.cutoff.eps0);
  echo["cutoff.eps1"] = format_g(c.spec.cutoff.eps1);
  echo["cutoff.eps"] = format_g(c.spec.cutoff.eps);
  echo_profile(echo, "data", c.data);
  echo_profile(echo, "w1", c.data_w1);
  echo["kg.with_w1"] = c.with_w1 ? "true" : "false";
  echo["dim"] = std::to_string(c.dim);
  echo["schedule.t_min"] = format_g(c.schedule.t_min);
  echo["schedule.ratio"] = format_g(c.schedule.ratio);
  echo["schedule.count"] = std::to_string(c.schedule.count);
  echo["grid.margin"] = format_g(c.grid.margin);
  echo["grid.refine"] = std::to_string(c.grid.refine);
  echo["grid.n_cap"] = std::to_string(c.grid.n_cap);
  echo["seed"] = std::to_string(c.seed);
  echo["deterministic"] = c.deterministic ? "true" : "false";
  echo["tolerance"] = format_g(c.tolerance);
  echo["window.r0"] = format_g(c.r0);
  echo["window.r1"] = format_g(c.r1);
  echo["observable.kind"] = observable_id(c.observable);
  echo["observable.r0"] = format_g(c.observable_r0);
  echo["observable.r1"] = format_g(c.observable_r1);
  echo["observable.width"] = format_g(c.observable_width);
  echo["opnorm.iters"] = std::to_string(c.power_iters);
  return echo;
}

ConvergenceReport run_convergence_study(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  require_dim(config.dim);
  require_policy(config.grid);
  validate_symbol(config.spec);
  require_limit_scope(config.spec);
  const Regime regime = regime_of(config.spec);
  if (!std::isfinite(config.tolerance) || config.tolerance <= 0.0) {
    fail(ErrorKind::usage, "tolerance must be positive");
  }

  const auto positive = config.schedule.times();
  std::vector<double> ts;
  ts.reserve(2 * positive.size());
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
    ts.push_back(-*it);
  }
  ts.insert(ts.end(), positive.begin(), positive.end());

  ConvergenceReport report;
  report.id = config.id;
  report.echo = echo_config(config);
  report.echo["study"] = "converge";

  fill_rows(ts, report, [&](double t) -> RowOutcome {
    const GridSpec grid =
        policy_grid(config.spec.model, config.data, config.dim, t, config.grid);
    const FieldState u0 = synthesize_data(config.data, grid);
    const FieldState ut = evolve(config.spec.model, u0, t);
    const double wrap = exterior_mass_fraction(ut);
    if (wrap >= kWrapLimit) {
      return skip_row(t, "wrap-around mass " + format_short(wrap) +
                             " breaches the monitor");
    }
    const double measured =
        truncated_energy(config.spec, config.spec.model, u0, t);
    const LimitPrediction pred = predict_limit(config.spec, u0);
    if (pred.flagged) {
      return skip_row(t, "limit prediction quadrature is flagged");
    }
    RowOutcome o;
    o.row = ReportRow{t,      measured, pred.value, rel_gap(measured, pred.value),
                      grid.n, grid.L,   wrap};
    return o;
  });

  std::vector<ReportRow> pos;
  std::vector<ReportRow> neg;
  for (const auto& row : report.rows) {
    (row.t > 0 ? pos : neg).push_back(row);
  }
  report.tail_decreasing = tail_ok(pos);
  if (pos.empty() || neg.empty()) {
    report.verdict = config.id + ": no accepted rows for one time sign";
    return report;
  }
  const ReportRow& fin_pos = pos.back();
  const ReportRow& fin_neg = neg.front();
  const double mass = config.data.target_norm * config.data.target_norm;
  bool ok = false;
  std::string gap_pos;
  std::string gap_neg;
  if (regime == Regime::subcritical) {
    gap_pos = format_short(fin_pos.measured / mass);
    gap_neg = format_short(fin_neg.measured / mass);
    ok = fin_pos.measured <= config.tolerance * mass &&
         fin_neg.measured <= config.tolerance * mass;
  } else {
    gap_pos = format_short(fin_pos.rel_error);
    gap_neg = format_short(fin_neg.rel_error);
    ok = fin_pos.rel_error <= config.tolerance &&
         fin_neg.rel_error <= config.tolerance;
  }
  report.pass = ok;
  report.verdict = config.id + ": " + regime_id(regime) + " regime, final " +
                   (regime == Regime::subcritical ? "energy fraction "
                                                  : "rel error ") +
                   gap_pos + " (+t) / " + gap_neg + " (-t), tolerance " +
                   format_short(config.tolerance) +
                   (ok ? ": PASS" : ": FAIL") +
                   (report.tail_decreasing ? "" : "; tail oscillates");
  report.wall_seconds = elapsed_or_zero(start, config.deterministic);
  return report;
}

ConvergenceReport run_kg_microlocal(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  require_dim(config.dim);
  require_policy(config.grid);
  if (config.spec.variant != SymbolVariant::kg &&
      config.spec.variant != SymbolVariant::kg_indicator) {
    fail(ErrorKind::hypothesis,
         "the microlocal Klein-Gordon split needs the kg symbol or its bare "
         "cone indicator");
  }
  validate_symbol(config.spec);
  require_half_kg(config);

  ConvergenceReport report;
  report.id = config.id;
  report.echo = echo_config(config);
  report.echo["study"] = "kg-micro";

  fill_rows(config.schedule.times(), report, [&](double t) -> RowOutcome {
    const GridSpec grid = merged_grid(config.spec.model, config, t);
    const FieldState w0 = synthesize_data(config.data, grid);
    const FieldState w1 =
        config.with_w1 ? synthesize_data(config.data_w1, grid) : zero_state(grid);
    const KGState kg = kg_evolve(w0, w1, t);
    const double wrap = exterior_mass_fraction(kg.u);
    if (wrap >= kWrapLimit) {
      return skip_row(t, "wrap-around mass " + format_short(wrap) +
                             " breaches the monitor");
    }
    const FieldState op_wt = apply_quantization(config.spec, t, kg.wt);
    const FieldState op_w = apply_quantization(config.spec, t, kg.w);
    double measured = std::pow(norm(op_wt, NormKind::l2), 2) +
                      std::pow(norm(op_w, NormKind::l2), 2);
    for (int axis = 0; axis < config.dim; ++axis) {
      const FieldState dw = apply_multiplier(
          [axis](std::array<double, 2> xi) { return kI * xi[axis]; }, kg.w);
      const FieldState op_dw = apply_quantization(config.spec, t, dw);
      measured += std::pow(norm(op_dw, NormKind::l2), 2);
    }
    const double predicted = 0.25 * (std::pow(norm(w0, NormKind::h1), 2) +
                                     std::pow(norm(w1, NormKind::l2), 2));
    RowOutcome o;
    o.row = ReportRow{t,      measured, predicted, rel_gap(measured, predicted),
                      grid.n, grid.L,   wrap};
    return o;
  });

  report.tail_decreasing = tail_ok(report.rows);
  if (report.rows.empty()) {
    report.verdict = config.id + ": no accepted rows";
    return report;
  }
  const ReportRow& fin = report.rows.back();
  report.pass = fin.rel_error <= config.tolerance;
  report.verdict = config.id + ": exterior energy share, final rel error " +
                   format_short(fin.rel_error) + " against a quarter of the "
                   "conserved energy, tolerance " +
                   format_short(config.tolerance) +
                   (report.pass ? ": PASS" : ": FAIL") +
                   (report.tail_decreasing ? "" : "; tail oscillates");
  report.wall_seconds = elapsed_or_zero(start, config.deterministic);
  return report;
}

ConvergenceReport run_kg_classical(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  require_dim(config.dim);
  require_policy(config.grid);
  require_half_kg(config);
  if (!std::isfinite(config.r0) || config.r0 < 0.0 || config.r1 <= config.r0) {
    fail(ErrorKind::usage, "speed window needs 0 <= r0 < r1");
  }
  const SpectralWindow window =
      spectral_window(config.spec.model, config.r0, config.r1);

  ConvergenceReport report;
  report.id = config.id;
  report.echo = echo_config(config);
  report.echo["study"] = "kg-classical";

  fill_rows(config.schedule.times(), report, [&](double t) -> RowOutcome {
    const GridSpec grid = merged_grid(config.spec.model, config, t);
    const FieldState w0 = synthesize_data(config.data, grid);
    const FieldState w1 =
        config.with_w1 ? synthesize_data(config.data_w1, grid) : zero_state(grid);
    const KGState kg = kg_evolve(w0, w1, t);
    const double wrap = exterior_mass_fraction(kg.u);
    if (wrap >= kWrapLimit) {
      return skip_row(t, "wrap-around mass " + format_short(wrap) +
                             " breaches the monitor");
    }
    std::vector<const FieldState*> fields = {&kg.wt, &kg.w};
    std::vector<FieldState> grads;
    grads.reserve(static_cast<std::size_t>(config.dim));
    for (int axis = 0; axis < config.dim; ++axis) {
      grads.push_back(apply_multiplier(
          [axis](std::array<double, 2> xi) { return kI * xi[axis]; }, kg.w));
    }
    for (const auto& g : grads) fields.push_back(&g);
    const double lo = config.r0 * t;
    const double hi = config.r1 * t;
    const double cell = std::pow(grid.dx(), config.dim);
    double measured = 0.0;
    const std::int64_t count = grid.point_count();
    for (std::int64_t j = 0; j < count; ++j) {
      const double x0 =
          grid.x_at(static_cast<int>(config.dim == 1 ? j : j / grid.n));
      const double x1 =
          config.dim == 1 ? 0.0 : grid.x_at(static_cast<int>(j % grid.n));
      const double r = std::hypot(x0, x1);
      if (!(r > lo && r < hi)) continue;
      double density = 0.0;
      for (const FieldState* f : fields) {
        density += std::norm(f->values[static_cast<std::size_t>(j)]);
      }
      measured += density * cell;
    }
    const double predicted = kg_window_energy(w0, w1, window);
    RowOutcome o;
    o.row = ReportRow{t,      measured, predicted, rel_gap(measured, predicted),
                      grid.n, grid.L,   wrap};
    return o;
  });

  report.tail_decreasing = tail_ok(report.rows);
  if (report.rows.empty()) {
    report.verdict = config.id + ": no accepted rows";
    return report;
  }
  const ReportRow& fin = report.rows.back();
  const std::string band = "]" + format_short(config.r0) + ", " +
                           format_short(config.r1) + "[";
  if (fin.predicted > 0.0) {
    report.pass = fin.rel_error <= config.tolerance;
    report.verdict = config.id + ": shell energy over speeds " + band +
                     ", final rel error " + format_short(fin.rel_error) +
                     ", tolerance " + format_short(config.tolerance) +
                     (report.pass ? ": PASS" : ": FAIL") +
                     (report.tail_decreasing ? "" : "; tail oscillates");
  } else {
    // Residual window beyond the reachable speeds: the pass bound is a share
    // of the conserved energy, evaluated on the final row's grid.
    const GridSpec grid = merged_grid(config.spec.model, config, fin.t);
    const FieldState w0 = synthesize_data(config.data, grid);
    const FieldState w1 =
        config.with_w1 ? synthesize_data(config.data_w1, grid) : zero_state(grid);
    const double total = std::pow(norm(w0, NormKind::h1), 2) +
                         std::pow(norm(w1, NormKind::l2), 2);
    report.pass = fin.measured <= config.tolerance * total;
    report.verdict = config.id + ": residual energy over speeds " + band +
                     ", final share " + format_short(fin.measured / total) +
                     " of the conserved energy, tolerance " +
                     format_short(config.tolerance) +
                     (report.pass ? ": PASS" : ": FAIL");
  }
  report.wall_seconds = elapsed_or_zero(start, config.deterministic);
  return report;
}

ConvergenceReport run_asymptotic_profile(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  require_dim(config.dim);
  require_policy(config.grid);
  if (config.observable == ProfileObservable::smoothed_indicator &&
      (!std::isfinite(config.observable_r0) || config.observable_r0 < 0.0 ||
       config.observable_r1 <= config.observable_r0)) {
    fail(ErrorKind::usage, "observable band needs 0 <= r0 < r1");
  }
  if (config.observable == ProfileObservable::gaussian &&
      !(config.observable_width > 0.0)) {
    fail(ErrorKind::usage, "observable width must be positive");
  }

  ConvergenceReport report;
  report.id = config.id;
  report.echo = echo_config(config);
  report.echo["study"] = "profile";

  const DispersionModel& model = config.spec.model;
  fill_rows(config.schedule.times(), report, [&](double t) -> RowOutcome {
    const GridSpec grid =
        policy_grid(model, config.data, config.dim, t, config.grid);
    const FieldState u0 = synthesize_data(config.data, grid);
    const FieldState ut = evolve(model, u0, t);
    const double wrap = exterior_mass_fraction(ut);
    if (wrap >= kWrapLimit) {
      return skip_row(t, "wrap-around mass " + format_short(wrap) +
                             " breaches the monitor");
    }
    const FieldState vel = apply_multiplier(
        [&](std::array<double, 2> xi) {
          return cdouble{
              observable_value(config, speed_at(model, std::hypot(xi[0], xi[1]))),
              0.0};
        },
        ut);
    const double cell = std::pow(grid.dx(), config.dim);
    double acc = 0.0;
    const std::int64_t count = grid.point_count();
    for (std::int64_t j = 0; j < count; ++j) {
      const double x0 =
          grid.x_at(static_cast<int>(config.dim == 1 ? j : j / grid.n));
      const double x1 =
          config.dim == 1 ? 0.0 : grid.x_at(static_cast<int>(j % grid.n));
      const cdouble a = observable_value(config, std::hypot(x0, x1) / t) *
                        ut.values[static_cast<std::size_t>(j)];
      acc += std::norm(a - vel.values[static_cast<std::size_t>(j)]);
    }
    const double measured = std::sqrt(acc * cell);
    RowOutcome o;
    o.row = ReportRow{t,      measured, 0.0, rel_gap(measured, 0.0),
                      grid.n, grid.L,   wrap};
    return o;
  });

  report.tail_decreasing = tail_ok(report.rows);
  if (report.rows.empty()) {
    report.verdict = config.id + ": no accepted rows";
    return report;
  }
  const ReportRow& fin = report.rows.back();
  report.slope = octave_slope(report.rows, 0.5 * fin.t * (1.0 - 1e-12));
  const double bound = 0.05 * config.data.target_norm;
  report.pass = fin.measured <= bound && report.tail_decreasing;
  report.verdict = config.id + ": velocity-profile discrepancy, final " +
                   format_short(fin.measured) + " against bound " +
                   format_short(bound) + ", top-octave slope " +
                   format_short(report.slope) +
                   (report.pass ? ": PASS" : ": FAIL");
  report.wall_seconds = elapsed_or_zero(start, config.deterministic);
  return report;
}

ConvergenceReport run_opnorm_sweep(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  require_dim(config.dim);
  require_policy(config.grid);
  if (config.spec.variant != SymbolVariant::plain &&
      config.spec.variant != SymbolVariant::indicator &&
      config.spec.variant != SymbolVariant::kg_indicator) {
    fail(ErrorKind::hypothesis,
         "operator-norm sweeps cover the plain symbol and the bare cone "
         "indicators");
  }
  validate_symbol(config.spec);
  if (config.power_iters < 50) {
    fail(ErrorKind::usage, "power iteration needs at least 50 steps");
  }

  ConvergenceReport report;
  report.id = config.id;
  report.echo = echo_config(config);
  report.echo["study"] = "opnorm";

  fill_rows(config.schedule.times(), report, [&](double t) -> RowOutcome {
    const GridSpec grid =
        policy_grid(config.spec.model, config.data, config.dim, t, config.grid);
    const OpNormEstimate est =
        op_norm_estimate(config.spec, t, grid, config.power_iters, config.seed);
    if (est.flagged) {
      return skip_row(t, "power iteration flagged: " + est.flag_reason);
    }
    RowOutcome o;
    o.row = ReportRow{t, est.value, 0.0, 0.0, grid.n, grid.L, 0.0};
    return o;
  });

  if (report.rows.empty()) {
    report.verdict = config.id + ": no accepted rows";
    return report;
  }
  const double baseline = report.rows.front().measured;
  double lo = baseline;
  double hi = baseline;
  bool all_positive = true;
  std::vector<double> lt;
  std::vector<double> ln;
  for (auto& row : report.rows) {
    row.predicted = baseline;
    row.rel_error = rel_gap(row.measured, baseline);
    lo = std::min(lo, row.measured);
    hi = std::max(hi, row.measured);
    if (row.measured > 0.0) {
      lt.push_back(std::log(row.t));
      ln.push_back(std::log(row.measured));
    } else {
      all_positive = false;
    }
  }
  report.spread_ratio = lo > 0.0 ? hi / lo
                                 : std::numeric_limits<double>::infinity();
  if (all_positive && lt.size() >= 2) {
    report.slope = fit_line(lt, ln).slope;
  }
  if (config.spec.variant == SymbolVariant::plain) {
    const double bound = config.spec.cutoff.delta * config.dim + 0.05;
    report.pass = all_positive && report.slope <= bound;
    report.verdict = config.id + ": norm growth slope " +
                     format_short(report.slope) + " against the envelope "
                     "mass bound " +
                     format_short(bound) +
                     (report.pass ? ": PASS" : ": FAIL");
  } else {
    report.pass =
        all_positive && report.spread_ratio <= 3.0 && std::abs(report.slope) <= 0.05;
    report.verdict = config.id + ": norm spread ratio " +
                     format_short(report.spread_ratio) + " (bound 3), slope " +
                     format_short(report.slope) + " (bound 0.05)" +
                     (report.pass ? ": PASS" : ": FAIL");
  }
  report.wall_seconds = elapsed_or_zero(start, config.deterministic);
  return report;
}

void write_report(const ConvergenceReport& report, const std::string& path) {
  std::ofstream csv(path, std::ios::binary);
  if (!csv) fail(ErrorKind::io, "cannot open report file: " + path);
  csv << "t,measured,predicted,rel_error,n,L,wrap_mass\n";
  for (const auto& row : report.rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                  row.t, row.measured, row.predicted, row.rel_error, row.n,
                  row.L, row.wrap_mass);
    csv << buf;
  }
  csv.flush();
  if (!csv) fail(ErrorKind::io, "failed writing report file: " + path);

  nlohmann::json meta;
  meta["echo"] = report.echo;
  meta["format"] = kReportFormat;
  meta["id"] = report.id;
  meta["library"] = kLibraryVersion;
  meta["pass"] = report.pass;
  meta["rows"] = report.rows.size();
  meta["skipped"] = report.skipped;
  meta["slope"] = report.slope;
  meta["spread_ratio"] = report.spread_ratio;
  meta["tail_decreasing"] = report.tail_decreasing;
  meta["verdict"] = report.verdict;
  meta["wall_seconds"] = report.wall_seconds;

  std::filesystem::path sibling(path);
  sibling.replace_extension(".json");
  std::ofstream js(sibling, std::ios::binary);
  if (!js) {
    fail(ErrorKind::io, "cannot open report metadata: " + sibling.string());
  }
  js << meta.dump(2) << '\n';
  js.flush();
  if (!js) {
    fail(ErrorKind::io, "failed writing report metadata: " + sibling.string());
  }
}

}  // namespace microloc
