#include "patlab/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <tuple>

#include "patlab/norms.hpp"
#include "patlab/verifier.hpp"

namespace patlab {

namespace {

constexpr std::size_t kDivergenceRun = 5;

/// Cell index and local coordinate of a fine coordinate on a coarse axis.
std::pair<std::size_t, double> locate(double offset, double length, std::size_t coarse_n) {
  const double s = std::clamp(offset / length, 0.0, 1.0) * static_cast<double>(coarse_n - 1);
  auto cell = static_cast<std::size_t>(std::floor(s));
  cell = std::min(cell, coarse_n - 2);
  return {cell, s - static_cast<double>(cell)};
}

double relative_error(const ScalarField2D& est, const ScalarField2D& truth) {
  const double ref = norm_h0(truth);
  const double err = norm_h0(est - truth);
  if (ref == 0.0) return err;
  return err / ref;
}

double speed_error(const WaveSpeed& truth, const WaveSpeed& est) {
  return std::sqrt(speed_discrepancy_ratio(truth, est));
}

BoundaryTrace predict(const WaveSpeed& c, const BoundaryImpedance& gamma, const ScalarField2D& u0,
                      const SolverConfig& solver) {
  return forward_map(c, gamma, InitialState(u0), solver);
}

/// Tracks consecutive misfit increases.
class DivergenceGuard {
 public:
  bool update(double misfit) {
    if (has_last_ && misfit > last_) {
      ++run_;
    } else {
      run_ = 0;
    }
    last_ = misfit;
    has_last_ = true;
    return run_ >= kDivergenceRun;
  }

 private:
  double last_ = 0.0;
  bool has_last_ = false;
  std::size_t run_ = 0;
};

std::pair<double, double> window_ratios(std::span<const double> e, std::size_t window, bool& valid,
                                        bool& exact) {
  valid = true;
  exact = false;
  const std::size_t n_ratios = std::min(window, e.size() - 1);
  const std::size_t first = e.size() - 1 - n_ratios;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t k = first; k < e.size(); ++k) {
    if (!std::isfinite(e[k])) {
      valid = false;
      return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    if (e[k] == 0.0) exact = true;
  }
  if (exact) {
    valid = false;
    return {0.0, 0.0};
  }
  for (std::size_t k = first; k + 1 < e.size(); ++k) {
    const double r = e[k + 1] / e[k];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (hi > 1.0) valid = false;
  return {lo, hi};
}

}  // namespace

SpeedParametrization::SpeedParametrization(const Grid2D& fine, std::size_t coarse_nx,
                                           std::size_t coarse_ny)
    : fine_(fine), coarse_nx_(coarse_nx), coarse_ny_(coarse_ny) {
  if (coarse_nx < 2 || coarse_ny < 2) throw ConfigError("coarse speed mesh needs >= 2 nodes per axis");
  if (coarse_nx >= fine.nx() || coarse_ny >= fine.ny()) {
    throw ConfigError("coarse speed mesh must be strictly coarser than the field grid");
  }
  stencils_.reserve(fine.size());
  for (std::size_t j = 0; j < fine.ny(); ++j) {
    const auto [cj, ty] = locate(fine.y(j) - fine.origin_y(), fine.height(), coarse_ny);
    for (std::size_t i = 0; i < fine.nx(); ++i) {
      const auto [ci, tx] = locate(fine.x(i) - fine.origin_x(), fine.width(), coarse_nx);
      Stencil s{};
      s.c00 = cj * coarse_nx + ci;
      s.c10 = s.c00 + 1;
      s.c01 = s.c00 + coarse_nx;
      s.c11 = s.c01 + 1;
      s.w00 = (1.0 - tx) * (1.0 - ty);
      s.w10 = tx * (1.0 - ty);
      s.w01 = (1.0 - tx) * ty;
      s.w11 = tx * ty;
      stencils_.push_back(s);
    }
  }
}

std::vector<double> SpeedParametrization::prolong(std::span<const double> coarse) const {
  if (coarse.size() != size()) throw GeometryMismatchError("coarse vector has the wrong size");
  std::vector<double> out(stencils_.size());
  for (std::size_t k = 0; k < stencils_.size(); ++k) {
    const Stencil& s = stencils_[k];
    out[k] = s.w00 * coarse[s.c00] + s.w10 * coarse[s.c10] + s.w01 * coarse[s.c01] +
             s.w11 * coarse[s.c11];
  }
  return out;
}

std::vector<double> SpeedParametrization::restrict_transpose(std::span<const double> fine) const {
  if (fine.size() != stencils_.size()) throw GeometryMismatchError("fine vector has the wrong size");
  std::vector<double> out(size(), 0.0);
  for (std::size_t k = 0; k < stencils_.size(); ++k) {
    const Stencil& s = stencils_[k];
    out[s.c00] += s.w00 * fine[k];
    out[s.c10] += s.w10 * fine[k];
    out[s.c01] += s.w01 * fine[k];
    out[s.c11] += s.w11 * fine[k];
  }
  return out;
}

WaveSpeed project_speed(std::span<const double> coarse_update, const WaveSpeed& c_cur,
                        const SpeedParametrization& param) {
  require_same_grid(c_cur.grid(), param.fine_grid(), "project_speed");
  const std::vector<double> delta = param.prolong(coarse_update);
  std::vector<double> v(c_cur.field().values().begin(), c_cur.field().values().end());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = std::clamp(v[k] + delta[k], c_cur.c_low(), c_cur.c_high());
  }
  return WaveSpeed(ScalarField2D(c_cur.grid(), std::move(v)), c_cur.c_low(), c_cur.c_high());
}

void ReconstructionConfig::validate(const Grid2D& grid) const {
  if (step_u < 0.0 || !std::isfinite(step_u)) throw ConfigError("step_u must be positive (0 = auto)");
  if (step_c < 0.0 || !std::isfinite(step_c)) throw ConfigError("step_c must be positive (0 = auto)");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(tol_misfit >= 0.0)) throw ConfigError("tol_misfit must be non-negative");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (window < 2) throw ConfigError("monitoring window must be >= 2");
  if (!(step_c_scale > 0.0)) throw ConfigError("step_c_scale must be positive");
  if (coarse_nx < 2 || coarse_ny < 2 || coarse_nx >= grid.nx() || coarse_ny >= grid.ny()) {
    throw ConfigError("coarse speed mesh must be strictly coarser than the field grid");
  }
}

ContractionReport contraction_factors(std::span<const double> err_u, std::span<const double> err_c,
                                      std::size_t window) {
  if (err_u.size() < 3 || err_c.size() < 3) {
    throw PreconditionError("contraction factors need at least 3 records");
  }
  if (window < 1) throw ConfigError("window must be >= 1");
  ContractionReport r;
  std::tie(r.alpha_u, r.beta_u) = window_ratios(err_u, window, r.valid_u, r.exact_u);
  std::tie(r.alpha_c, r.beta_c) = window_ratios(err_c, window, r.valid_c, r.exact_c);
  r.ratios = std::min({window, err_u.size() - 1, err_c.size() - 1});
  return r;
}

ContractionReport contraction_factors(const IterateHistory& history, std::size_t window,
                                      ContractionSource source, std::size_t first_record) {
  std::vector<double> eu;
  std::vector<double> ec;
  for (std::size_t k = first_record; k < history.records.size(); ++k) {
    const IterateRecord& r = history.records[k];
    if (source == ContractionSource::truth) {
      eu.push_back(r.err_u_rel);
      ec.push_back(r.err_c_rel);
    } else {
      // Increments are recorded from the second iterate onwards.
      if (std::isnan(r.inc_u) || std::isnan(r.inc_c)) continue;
      eu.push_back(r.inc_u);
      ec.push_back(r.inc_c);
    }
  }
  return contraction_factors(eu, ec, window);
}

RelaxationDecision enforce_relaxation(const ContractionReport& report, StepSizes current,
                                      StepSizes max_steps, StepSizes min_steps) {
  RelaxationDecision d;
  d.steps.step_u = std::min(current.step_u, max_steps.step_u);
  d.steps.step_c = std::min(current.step_c, max_steps.step_c);
  if (report.exact_u || report.exact_c) return d;
  if (!std::isfinite(report.beta_c) || !std::isfinite(report.alpha_u)) return d;
  if (report.beta_c <= report.alpha_u) return d;

  d.adjusted = true;
  d.steps.step_c = 0.5 * d.steps.step_c;
  // Landweber contracts each mode by 1 - step * sigma^2, so scaling step_u by
  // s moves 1 - alpha_u to roughly s * (1 - alpha_u).
  // A speed iterate that is not contracting leaves no pressure rate to
  // match; the pressure is then slowed hard.
  double s = 0.125;
  if (report.beta_c < 1.0 && report.alpha_u < 1.0) {
    s = std::clamp((1.0 - report.beta_c) / (2.0 * (1.0 - report.alpha_u)), 0.0, 0.5);
  }
  d.steps.step_u = d.steps.step_u * s;
  if (d.steps.step_c < min_steps.step_c) {
    d.steps.step_c = min_steps.step_c;
    d.saturated = true;
  }
  if (d.steps.step_u < min_steps.step_u) {
    d.steps.step_u = min_steps.step_u;
    d.saturated = true;
  }
  if (d.saturated) {
    d.warning = "relaxation saturated at step_u=" + std::to_string(d.steps.step_u) +
                ", step_c=" + std::to_string(d.steps.step_c) + " (beta_c=" +
                std::to_string(report.beta_c) + ", alpha_u=" + std::to_string(report.alpha_u) + ")";
  }
  return d;
}

double estimate_landweber_step(const WaveSpeed& c, const BoundaryImpedance& gamma,
                               const SolverConfig& cfg, std::size_t iterations) {
  const Grid2D& grid = c.grid();
  std::mt19937_64 gen(0x5eed5eedULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(grid.size(), 0.0);
  for (std::size_t j = 1; j + 1 < grid.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) v[grid.index(i, j)] = dist(gen);
  }
  ScalarField2D x(grid, std::move(v));
  x = (1.0 / norm_h0(x)) * x;
  double lambda = 0.0;
  for (std::size_t it = 0; it < std::max<std::size_t>(iterations, 1); ++it) {
    const BoundaryTrace t = predict(c, gamma, x, cfg);
    const ScalarField2D y = adjoint_simulate(t, c, gamma, cfg).grad_u0.with_zero_boundary();
    lambda = inner_h0(x, y);
    const double ny = norm_h0(y);
    if (ny == 0.0) throw DegenerateError("forward map annihilates the power-iteration vector");
    x = (1.0 / ny) * y;
  }
  if (!(lambda > 0.0)) throw DegenerateError("non-positive operator norm estimate");
  return 1.0 / lambda;
}

PressureResult reconstruct_pressure(const BoundaryTrace& m, const WaveSpeed& c,
                                    const BoundaryImpedance& gamma, const SolverConfig& solver,
                                    const ReconstructionConfig& cfg, const GroundTruth* truth,
                                    const ScalarField2D* initial, const CheckpointFn& checkpoint,
                                    std::size_t checkpoint_stride) {
  const Grid2D& grid = c.grid();
  cfg.validate(grid);
  require_same_grid(grid, m.grid(), "reconstruct_pressure");
  SolverConfig run = solver;
  run.keep_history = false;
  run.snapshot_stride = 0;

  ScalarField2D u = initial ? initial->with_zero_boundary() : ScalarField2D::zeros(grid);
  const double step_u = cfg.step_u > 0.0 ? cfg.step_u : estimate_landweber_step(c, gamma, run);
  const double m_norm = trace_norm_h0(m);

  PressureResult out{u, {}, step_u};
  DivergenceGuard guard;
  double last_inc = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n = 0;; ++n) {
    const BoundaryTrace pred = predict(c, gamma, u, run);
    require_same_geometry(pred, m, "reconstruct_pressure");
    const BoundaryTrace residual = m - pred;
    IterateRecord rec;
    rec.iter = n;
    rec.misfit = trace_norm_h0(residual);
    rec.step_u = step_u;
    rec.err_c_rel = 0.0;
    rec.inc_u = last_inc;
    if (truth) {
      rec.err_u_rel = relative_error(u, truth->u0);
      rec.in_region = region_verdict(0.0, rec.err_u_rel * rec.err_u_rel, cfg.epsilon);
    }
    out.history.records.push_back(rec);
    if (checkpoint && checkpoint_stride > 0 && n % checkpoint_stride == 0) checkpoint(n, u, c);
    if (guard.update(rec.misfit)) {
      out.u0 = u;
      throw DivergenceError("Landweber misfit increased for 5 consecutive iterations; reduce step_u",
                            out.history);
    }
    if (rec.misfit <= cfg.tol_misfit * m_norm || n >= cfg.max_iter) break;
    const ScalarField2D g = adjoint_simulate(residual, c, gamma, run).grad_u0;
    ScalarField2D next = (u + step_u * g).with_zero_boundary();
    last_inc = norm_h0(next - u);
    u = std::move(next);
  }
  out.u0 = u;
  return out;
}

std::vector<double> gradient_wavespeed(const SimulationResult& forward,
                                       const BoundaryTrace& residual, const WaveSpeed& c,
                                       const BoundaryImpedance& gamma, const SolverConfig& solver,
                                       const SpeedParametrization& param) {
  require_same_grid(c.grid(), param.fine_grid(), "gradient_wavespeed");
  if (forward.history.empty()) {
    throw ConfigError("gradient_wavespeed needs a forward run that kept its time levels");
  }
  SolverConfig run = solver;
  run.snapshot_stride = 0;
  const AdjointResult adj = adjoint_simulate(residual, c, gamma, run, &forward);
  // J = 1/2 |Lambda u - m|^2 and residual = m - Lambda u, so dJ/dq = -sensitivity.
  const auto cv = c.field().values();
  std::vector<double> dj_dc(cv.size());
  for (std::size_t k = 0; k < cv.size(); ++k) {
    const double dq_dc = -2.0 / (cv[k] * cv[k] * cv[k]);
    dj_dc[k] = -adj.sensitivity_inv_c2[k] * dq_dc;
  }
  return param.restrict_transpose(dj_dc);
}

std::vector<double> gradient_wavespeed(const ScalarField2D& u0_cur, const WaveSpeed& c,
                                       const BoundaryTrace& residual,
                                       const BoundaryImpedance& gamma, const SolverConfig& solver,
                                       const SpeedParametrization& param) {
  SolverConfig run = solver;
  run.keep_history = true;
  run.snapshot_stride = 0;
  const SimulationResult fwd = simulate(c, gamma, InitialState(u0_cur), run);
  return gradient_wavespeed(fwd, residual, c, gamma, run, param);
}

JointResult joint_reconstruct(const BoundaryTrace& m, const ScalarField2D& u0_guess,
                              const WaveSpeed& c_guess, const BoundaryImpedance& gamma,
                              const SolverConfig& solver, const ReconstructionConfig& cfg,
                              const GroundTruth* truth, const CheckpointFn& checkpoint,
                              std::size_t checkpoint_stride) {
  const Grid2D& grid = c_guess.grid();
  cfg.validate(grid);
  require_same_grid(grid, m.grid(), "joint_reconstruct");
  require_same_grid(grid, u0_guess.grid(), "joint_reconstruct");
  if (truth && !truth->c) throw ConfigError("joint monitoring needs the true speed");
  const SpeedParametrization param(grid, cfg.coarse_nx, cfg.coarse_ny);

  // Every candidate speed lies in [c_low, c_high]; fixing the CFL reference at
  // c_high keeps all traces on the time grid of m.
  SolverConfig run = solver;
  run.reference_speed = std::max(solver.reference_speed, c_guess.c_high());
  run.keep_history = false;
  run.snapshot_stride = 0;
  SolverConfig run_hist = run;
  run_hist.keep_history = true;

  ScalarField2D u = u0_guess.with_zero_boundary();
  WaveSpeed c = c_guess;
  WaveSpeed c_prev = c_guess;

  const double max_step_u = cfg.step_u > 0.0 ? cfg.step_u : estimate_landweber_step(c, gamma, run);
  double max_step_c = cfg.step_c * cfg.step_c_scale;
  bool step_c_known = cfg.step_c > 0.0;
  StepSizes steps{max_step_u, max_step_c};
  const double m_norm = trace_norm_h0(m);

  JointResult out{u, c, {}};
  IterateHistory& hist = out.history;
  DivergenceGuard guard;
  // Records since the last step change; the first check needs three, later
  // ones a full window measured under the new steps.
  std::size_t monitor_from = 0;
  std::size_t needed = 3;
  bool was_in_region = false;
  double inc_u = std::numeric_limits<double>::quiet_NaN();
  double inc_c = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t n = 0;; ++n) {
    const BoundaryTrace pred = predict(c, gamma, u, run);
    require_same_geometry(pred, m, "joint_reconstruct");
    const BoundaryTrace residual = m - pred;

    IterateRecord rec;
    rec.iter = n;
    rec.misfit = trace_norm_h0(residual);
    rec.inc_u = inc_u;
    rec.inc_c = inc_c;
    if (truth) {
      rec.err_u_rel = relative_error(u, truth->u0);
      rec.err_c_rel = speed_error(*truth->c, c);
      rec.in_region =
          region_verdict(rec.err_c_rel * rec.err_c_rel, rec.err_u_rel * rec.err_u_rel, cfg.epsilon);
      if (was_in_region && !*rec.in_region) {
        hist.warnings.push_back("iterate " + std::to_string(n) + " left the uniqueness region");
      }
      was_in_region = *rec.in_region;
    }
    hist.records.push_back(rec);

    if (hist.records.size() - monitor_from >= needed) {
      const auto source = truth ? ContractionSource::truth : ContractionSource::increments;
      std::size_t usable = 0;
      for (std::size_t k = monitor_from; k < hist.records.size(); ++k) {
        const IterateRecord& r = hist.records[k];
        if (source == ContractionSource::truth || (!std::isnan(r.inc_u) && !std::isnan(r.inc_c))) {
          ++usable;
        }
      }
      if (usable >= std::min<std::size_t>(needed, 3)) {
        const ContractionReport rep = contraction_factors(hist, cfg.window, source, monitor_from);
        IterateRecord& last = hist.records.back();
        last.alpha_u = rep.alpha_u;
        last.beta_u = rep.beta_u;
        last.alpha_c = rep.alpha_c;
        last.beta_c = rep.beta_c;
        if (cfg.enforce_relaxation && step_c_known) {
          const StepSizes floor{max_step_u * 1e-3, max_step_c / 16.0};
          const RelaxationDecision d =
              enforce_relaxation(rep, steps, StepSizes{max_step_u, max_step_c}, floor);
          if (d.adjusted) {
            steps = d.steps;
            monitor_from = hist.records.size() - 1;
            needed = cfg.window + 1;
          }
          if (d.saturated) hist.warnings.push_back("iterate " + std::to_string(n) + ": " + d.warning);
        }
      }
    }
    hist.records.back().step_u = steps.step_u;
    hist.records.back().step_c = steps.step_c;

    if (checkpoint && checkpoint_stride > 0 && n % checkpoint_stride == 0) checkpoint(n, u, c);
    if (guard.update(rec.misfit)) {
      out.u0 = u;
      out.c = c;
      throw DivergenceError("joint misfit increased for 5 consecutive iterations; reduce the steps",
                            hist);
    }
    if (rec.misfit <= cfg.tol_misfit * m_norm || n >= cfg.max_iter) break;

    // Pressure sweep at the current speed.
    const ScalarField2D gu = adjoint_simulate(residual, c, gamma, run).grad_u0;
    ScalarField2D u_next = (u + steps.step_u * gu).with_zero_boundary();

    // Speed step at the updated pressure, from the extrapolated point under momentum.
    WaveSpeed y = c;
    if (cfg.nesterov && n > 0) {
      const double mu = static_cast<double>(n) / static_cast<double>(n + 3);
      std::vector<double> v(c.field().values().begin(), c.field().values().end());
      const auto prev = c_prev.field().values();
      for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = std::clamp(v[k] + mu * (v[k] - prev[k]), c.c_low(), c.c_high());
      }
      y = WaveSpeed(ScalarField2D(grid, std::move(v)), c.c_low(), c.c_high());
    }
    const SimulationResult fwd = simulate(y, gamma, InitialState(u_next), run_hist);
    const BoundaryTrace r_y = m - fwd.trace;
    const std::vector<double> g = gradient_wavespeed(fwd, r_y, y, gamma, run_hist, param);

    if (!step_c_known) {
      // One-shot line search: trial steps scaled so the largest nodal change
      // ranges over 2^-6 .. 2 times two percent of c_high.
      const std::vector<double> pg = param.prolong(g);
      double pg_max = 0.0;
      for (double v : pg) pg_max = std::max(pg_max, std::abs(v));
      double best_step = 0.0;
      const double base = pg_max > 0.0 ? 0.02 * c.c_high() / pg_max : 0.0;
      if (pg_max > 0.0) {
        double best = trace_norm_h0(r_y);
        for (int e = -6; e <= 1; ++e) {
          const double trial = base * std::ldexp(1.0, e);
          std::vector<double> upd(g.size());
          for (std::size_t k = 0; k < g.size(); ++k) upd[k] = -trial * g[k];
          const WaveSpeed ct = project_speed(upd, y, param);
          const double mis = trace_norm_h0(m - predict(ct, gamma, u_next, run));
          if (mis < best) {
            best = mis;
            best_step = trial;
          }
        }
      }
      if (best_step == 0.0) best_step = pg_max > 0.0 ? base * std::ldexp(1.0, -6) : 0.0;
      // The best single-step decrease overshoots as a fixed step on the
      // stiffer directions; a quarter of it is kept.
      max_step_c = 0.25 * best_step * cfg.step_c_scale;
      steps.step_c = max_step_c;
      step_c_known = true;
      hist.records.back().step_c = steps.step_c;
    }

    std::vector<double> upd(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) upd[k] = -steps.step_c * g[k];
    WaveSpeed c_next = project_speed(upd, y, param);

    inc_u = norm_h0(u_next - u);
    inc_c = norm_h0(c_next.field() - c.field());
    c_prev = c;
    c = std::move(c_next);
    u = std::move(u_next);
  }
  out.u0 = u;
  out.c = c;
  return out;
}

}  // namespace patlab
