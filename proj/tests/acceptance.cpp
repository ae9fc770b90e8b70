// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "patlab/config.hpp"
#include "patlab/errors.hpp"
#include "patlab/experiment.hpp"
#include "patlab/parallel.hpp"
#include "patlab/reconstruct.hpp"
#include "patlab/verifier.hpp"
#include "patlab/wave.hpp"
#include "support.hpp"

using namespace patlab;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ------------------------------------------------------------------ 1

BoundaryTrace smooth_trace(std::size_t cells, std::size_t stride) {
  const Grid2D g = Grid2D::unit_square(cells);
  const ScalarField2D u0 =
      ScalarField2D::from_function(g, [](double x, double y) {
        const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
        return std::exp(-r2 / (2.0 * 0.01));
      }).with_zero_boundary();
  SolverConfig cfg;
  cfg.final_time = 2.0;
  cfg.cfl_factor = 0.25;
  cfg.record_stride = stride;
  return forward_map(WaveSpeed::constant(g, 1.0, 0.5, 2.0), BoundaryImpedance::uniform(g, 1.0),
                     InitialState(u0), cfg);
}

/// H0 distance between a trace and its refinement sampled on the coarse nodes
/// and record times.
double refinement_gap(const BoundaryTrace& coarse, const BoundaryTrace& fine) {
  std::vector<double> d(coarse.samples().size());
  for (std::size_t k = 0; k < coarse.n_samples(); ++k) {
    for (std::size_t b = 0; b < coarse.n_boundary(); ++b) {
      d[k * coarse.n_boundary() + b] = coarse(k, b) - fine(k, 2 * b);
    }
  }
  return trace_norm_h0(BoundaryTrace(coarse.grid(), coarse.dt_record(), coarse.n_samples(), d));
}

Outcome solver_convergence() {
  const Stopwatch sw;
  // Strides keep the record times common: dt halves with h at fixed CFL.
  const BoundaryTrace t64 = smooth_trace(64, 1);
  const BoundaryTrace t128 = smooth_trace(128, 2);
  const BoundaryTrace t256 = smooth_trace(256, 4);
  const double e1 = refinement_gap(t64, t128);
  const double e2 = refinement_gap(t128, t256);
  const double order = std::log2(e1 / e2);
  const double secs = sw.seconds();
  return {std::abs(order - 2.0) <= 0.3 && secs < 120.0,
          "order " + fmt("%.3f", order) + " on 64/128/256, " + fmt("%.1f", secs) + " s"};
}

// ------------------------------------------------------------------ 2

Outcome energy_dissipation() {
  const Grid2D g = Grid2D::unit_square(64);
  SpeedPhantomOptions so;
  so.variation = 0.1;
  PhantomSpec speed_spec;
  speed_spec.kind = PhantomKind::gaussians;
  speed_spec.features = {{0.4, 0.6, 0.15, 1.0}};
  const WaveSpeed c = make_speed_phantom(speed_spec, g, so);
  SolverConfig cfg;
  cfg.final_time = default_observation_time(g, c.c_low());
  const SimulationResult r =
      simulate(c, BoundaryImpedance::uniform(g, 1.0), make_pressure_phantom(two_disks(), g), cfg);
  const double e0 = r.discrete_energy.front();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < r.discrete_energy.size(); ++k) {
    worst = std::max(worst, r.discrete_energy[k] - r.discrete_energy[k - 1]);
  }
  return {worst <= 1e-12 * e0,
          std::to_string(r.discrete_energy.size()) + " steps to T=" + fmt("%.3f", cfg.final_time) +
              ", max increase / E0 " + fmt("%.2e", worst / e0) + ", E(T)/E0 " +
              fmt("%.3f", r.discrete_energy.back() / e0)};
}

// ------------------------------------------------------------------ 3

Outcome hminus1_oracle() {
  const Grid2D g = Grid2D::unit_square(128);
  const double n = norm_hminus1(sine_mode(g));
  const double expected = 1.0 / (8.0 * kPi * kPi);
  const double rel = std::abs(n * n - expected) / expected;
  return {rel < 0.01, "squared norm " + fmt("%.6e", n * n) + " vs " + fmt("%.6e", expected) +
                          ", relative " + fmt("%.2e", rel)};
}

// ------------------------------------------------------------------ 4

Outcome adjoint_checks() {
  const Grid2D g = Grid2D::unit_square(32);
  SpeedPhantomOptions so;
  so.variation = 0.1;
  PhantomSpec speed_spec;
  speed_spec.kind = PhantomKind::gaussians;
  speed_spec.features = {{0.5, 0.4, 0.2, 1.0}};
  const WaveSpeed c = make_speed_phantom(speed_spec, g, so);
  const auto gamma = BoundaryImpedance::uniform(g, 1.0);
  SolverConfig cfg;
  cfg.final_time = 1.5;
  cfg.record_stride = 2;
  const TimeStepping ts = cfl_timestep(g, c, cfg);
  double worst_identity = 0.0;
  for (std::uint64_t probe = 0; probe < 5; ++probe) {
    const InitialState d(random_field(g, 10 + probe, true), random_field(g, 20 + probe, false));
    const BoundaryTrace r = random_trace(g, ts.dt_record(), ts.n_records(), 30 + probe);
    const double lhs = trace_inner_h0(forward_map(c, gamma, d, cfg), r);
    const AdjointResult adj = adjoint_simulate(r, c, gamma, cfg);
    const double rhs = inner_h0(d.u0(), adj.grad_u0) + inner_h0(d.u1(), adj.grad_u1);
    worst_identity = std::max(worst_identity, std::abs(lhs - rhs) / std::abs(lhs));
  }

  const SpeedParametrization param(g, 4, 4);
  const InitialState s = make_pressure_phantom(two_disks(), g);
  const WaveSpeed truth(ScalarField2D::from_function(g,
                                                     [](double x, double y) {
                                                       const double r2 = (x - 0.5) * (x - 0.5) +
                                                                         (y - 0.5) * (y - 0.5);
                                                       return 1.0 + 0.05 * std::exp(-r2 / 0.045);
                                                     }),
                        0.8, 1.2);
  const WaveSpeed c0 = WaveSpeed::constant(g, 1.0, 0.8, 1.2);
  SolverConfig fd_cfg;
  fd_cfg.final_time = 2.0;
  fd_cfg.reference_speed = 1.2;
  const BoundaryTrace m = forward_map(truth, gamma, s, fd_cfg);
  auto misfit = [&](const WaveSpeed& cc) {
    const double r = trace_norm_h0(forward_map(cc, gamma, s, fd_cfg) - m);
    return 0.5 * r * r;
  };
  const BoundaryTrace residual = m - forward_map(c0, gamma, s, fd_cfg);
  const std::vector<double> grad = gradient_wavespeed(s.u0(), c0, residual, gamma, fd_cfg, param);
  std::mt19937_64 gen(40);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double h = 1e-4;
  double worst_fd = 0.0;
  for (int probe = 0; probe < 5; ++probe) {
    std::vector<double> plus(param.size());
    for (double& v : plus) v = dist(gen);
    double analytic = 0.0;
    for (std::size_t k = 0; k < plus.size(); ++k) analytic += grad[k] * plus[k];
    std::vector<double> minus(plus);
    for (double& v : plus) v *= h;
    for (double& v : minus) v *= -h;
    const double fd =
        (misfit(project_speed(plus, c0, param)) - misfit(project_speed(minus, c0, param))) / (2.0 * h);
    worst_fd = std::max(worst_fd, std::abs(analytic - fd) / std::abs(fd));
  }
  return {worst_identity < 1e-6 && worst_fd < 1e-3,
          "adjoint identity worst " + fmt("%.2e", worst_identity) + ", gradient vs FD worst " +
              fmt("%.2e", worst_fd)};
}

// ------------------------------------------------------------------ 5

const char* kEnsembleConfig = R"([run]
seed = 2024
[grid]
cells = 64
[impedance]
gamma = 1.0
[phantom]
kind = disks
[phantom.feature]
x = 0.45
y = 0.5
radius = 0.2
amplitude = 1.0
[phantom.feature]
x = 0.65
y = 0.35
radius = 0.1
amplitude = 0.5
[speed]
kind = gaussians
variation = 0.05
[speed.feature]
x = 0.5
y = 0.5
radius = 0.15
amplitude = 1.0
[perturbation]
mode = log_uniform
state_min = 1e-3
state_max = 1e-1
speed_fraction = 0.5
[verify]
epsilon = 1e-2
members = 50
)";

Outcome desk_certification() {
  const Stopwatch sw;
  const ExperimentConfig cfg = load_experiment_config(kEnsembleConfig);
  const Grid2D grid = cfg.grid();
  const std::size_t workers = default_worker_count();
  const auto members =
      build_ensemble(cfg, grid, ensemble_targets(cfg, cfg.verify.epsilon), workers);
  StabilityOptions opts;
  opts.epsilon = cfg.verify.epsilon;
  opts.workers = workers;
  SolverConfig solver = cfg.resolved_solver();
  solver.reference_speed = members.front().c.c_high();
  const StabilityReport rep =
      stability_report(members, BoundaryImpedance::uniform(grid, cfg.gamma), solver, opts);
  const double secs = sw.seconds();
  const bool ok = rep.n_pairs == 50 && rep.pairs_in_region == 50 && rep.violations == 0 &&
                  std::isfinite(rep.c_empirical) && secs < 600.0;
  return {ok, std::to_string(rep.n_pairs) + " members, " + std::to_string(rep.pairs_in_region) +
                  " in region, " + std::to_string(rep.violations) + " violations, c_empirical " +
                  fmt("%.4g", rep.c_empirical) + ", " + fmt("%.1f", secs) + " s"};
}

// ------------------------------------------------------------------ 6

Outcome region_geometry() {
  const Grid2D g = Grid2D::unit_square(64);
  const WaveSpeed c = WaveSpeed::constant(g, 1.0, 0.5, 2.0);
  const InitialState s = make_pressure_phantom(two_disks(), g);
  const double nudge = 1e-6;
  std::size_t pairs = 0;
  std::size_t flipped = 0;
  double worst_offset = 0.0;
  for (double eps : {1e-3, 1e-2, 1e-1, 1.0}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const PerturbationShapes shapes = make_perturbation_shapes(g, seed);
      const double b = 0.02 * static_cast<double>(seed);
      // Both ratios are quadratic in their amplitudes; rescale the speed
      // amplitude onto the boundary, then polish once with the measured ratio.
      double a = 1e-3;
      for (int pass = 0; pass < 2; ++pass) {
        const PerturbedPair trial = apply_perturbation(c, s, shapes, a, b);
        a *= std::sqrt(eps * trial.state_ratio_sq / trial.speed_ratio_sq);
      }
      const PerturbedPair p = apply_perturbation(c, s, shapes, a, b);
      const double sr = speed_discrepancy_ratio(c, p.c_tilde);
      const double ur = state_discrepancy_ratio(s, p.s_tilde);
      worst_offset = std::max(worst_offset, std::abs(sr / (eps * ur) - 1.0));
      const bool speed_flips =
          region_verdict(sr * (1.0 - nudge), ur, eps) != region_verdict(sr * (1.0 + nudge), ur, eps);
      const bool state_flips =
          region_verdict(sr, ur * (1.0 - nudge), eps) != region_verdict(sr, ur * (1.0 + nudge), eps);
      ++pairs;
      if (speed_flips && state_flips) ++flipped;
    }
  }
  return {flipped == pairs, std::to_string(flipped) + "/" + std::to_string(pairs) +
                                " boundary pairs flip under both nudges, worst boundary offset " +
                                fmt("%.1e", worst_offset)};
}

// ------------------------------------------------------------------ 7

Outcome fixed_speed_reconstruction() {
  const Stopwatch sw;
  const Grid2D g = Grid2D::unit_square(64);
  const InitialState s = make_pressure_phantom(two_disks(), g);
  const WaveSpeed c = WaveSpeed::constant(g, 1.0, 0.9, 1.1);
  SolverConfig cfg;
  cfg.final_time = default_observation_time(g, 0.9);
  cfg.reference_speed = 1.1;
  const auto gamma = BoundaryImpedance::uniform(g, 1.0);
  const BoundaryTrace m = forward_map(c, gamma, s, cfg);
  ReconstructionConfig rc;
  rc.max_iter = 200;
  rc.tol_misfit = 0.0;
  const GroundTruth truth{s.u0(), std::nullopt};
  const PressureResult r = reconstruct_pressure(m, c, gamma, cfg, rc, &truth);
  std::size_t first_below = 0;
  for (const auto& rec : r.history.records) {
    if (rec.err_u_rel < 0.05) {
      first_below = rec.iter;
      break;
    }
  }
  const double final_err = r.history.records.back().err_u_rel;
  const double secs = sw.seconds();
  return {final_err < 0.05 && secs < 300.0,
          "relative H0 error " + fmt("%.2e", final_err) + " after " +
              std::to_string(r.history.records.size() - 1) + " iterations (below 5% from iteration " +
              std::to_string(first_below) + "), " + fmt("%.1f", secs) + " s"};
}

// ------------------------------------------------------------------ 8

/// Standard joint benchmark: 64^2 two-disk pressure, a 1% speed bump carried
/// by the 4 x 4 coarse mesh, weak impedance, start from u = 0 and c = 1.
struct JointBenchmark {
  Grid2D g = Grid2D::unit_square(64);
  SpeedParametrization param{g, 4, 4};
  InitialState s = make_pressure_phantom(two_disks(), g);
  WaveSpeed truth = [this] {
    std::vector<double> coarse(param.size());
    for (std::size_t j = 0; j < param.coarse_ny(); ++j) {
      for (std::size_t i = 0; i < param.coarse_nx(); ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(param.coarse_nx() - 1) - 0.5;
        const double y = static_cast<double>(j) / static_cast<double>(param.coarse_ny() - 1) - 0.5;
        coarse[j * param.coarse_nx() + i] = 0.01 * std::exp(-(x * x + y * y) / (2.0 * 0.15 * 0.15));
      }
    }
    std::vector<double> fine = param.prolong(coarse);
    for (double& v : fine) v += 1.0;
    return WaveSpeed(ScalarField2D(g, std::move(fine)), 0.8, 1.2);
  }();
  BoundaryImpedance gamma = BoundaryImpedance::uniform(g, 0.05);
  SolverConfig solver = [this] {
    SolverConfig out;
    out.final_time = default_observation_time(g, 0.8);
    out.reference_speed = 1.2;
    return out;
  }();
  BoundaryTrace m = forward_map(truth, gamma, s, solver);

  ReconstructionConfig base() const {
    ReconstructionConfig cfg;
    cfg.coarse_nx = cfg.coarse_ny = 4;
    cfg.epsilon = 1.0;
    cfg.tol_misfit = 0.0;
    cfg.max_iter = 100;
    return cfg;
  }

  IterateHistory run(const ReconstructionConfig& cfg, bool* diverged) const {
    const GroundTruth gt{s.u0(), truth};
    try {
      return joint_reconstruct(m, ScalarField2D::zeros(g), WaveSpeed::constant(g, 1.0, 0.8, 1.2),
                               gamma, solver, cfg, &gt)
          .history;
    } catch (const DivergenceError& e) {
      *diverged = true;
      return e.history();
    }
  }
};

std::size_t count_outside(const IterateHistory& h) {
  std::size_t n = 0;
  for (const auto& r : h.records) {
    if (!r.in_region || !*r.in_region) ++n;
  }
  return n;
}

Outcome relaxation_discipline() {
  const Stopwatch sw;
  const JointBenchmark b;
  ReconstructionConfig on = b.base();
  on.enforce_relaxation = true;
  bool diverged_on = false;
  const IterateHistory h_on = b.run(on, &diverged_on);

  ReconstructionConfig off = b.base();
  off.enforce_relaxation = false;
  off.step_c_scale = 10.0;
  bool diverged_off = false;
  const IterateHistory h_off = b.run(off, &diverged_off);

  const std::size_t out_on = count_outside(h_on);
  const std::size_t out_off = count_outside(h_off);
  const bool ok = !diverged_on && h_on.records.size() == on.max_iter + 1 && out_on == 0 && out_off > 0;
  return {ok, "enforced: " + std::to_string(h_on.records.size()) + " iterates, " +
                  std::to_string(out_on) + " outside; unenforced x10 step_c: " +
                  std::to_string(h_off.records.size()) + " iterates, " + std::to_string(out_off) +
                  " outside" + (diverged_off ? " before divergence" : "") + ", " +
                  fmt("%.1f", sw.seconds()) + " s"};
}

// ------------------------------------------------------------------ 9

const char* kReproConfig = R"([run]
seed = 77
[grid]
cells = 32
[phantom]
kind = disks
[phantom.feature]
x = 0.45
y = 0.5
radius = 0.2
amplitude = 1.0
[speed]
kind = gaussians
variation = 0.05
[speed.feature]
x = 0.5
y = 0.5
radius = 0.15
amplitude = 1.0
[verify]
members = 6
[reconstruct]
mode = joint
max_iter = 8
[sweep]
epsilon = 1e-3, 1e-2
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const fs::path dir = scratch_dir("acceptance-repro");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.ini";
  std::ofstream(cfg, std::ios::binary) << kReproConfig;
  std::size_t compared = 0;
  std::size_t differing = 0;
  for (const char* cmd : {"simulate", "verify", "reconstruct", "sweep"}) {
    fs::path outs[2];
    for (int k = 0; k < 2; ++k) {
      RunOptions opts;
      opts.config_path = cfg;
      opts.out_dir = outs[k] = dir / (std::string(cmd) + "-" + std::to_string(k));
      std::ostringstream log;
      std::ostringstream err;
      const int code = run_command(cmd, opts, log, err);
      if (code == 2) return {false, std::string(cmd) + " failed: " + err.str()};
    }
    for (const auto& e : fs::recursive_directory_iterator(outs[0])) {
      if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
      ++compared;
      if (slurp(e.path()) != slurp(outs[1] / fs::relative(e.path(), outs[0]))) ++differing;
    }
  }
  fs::remove_all(dir);
  return {compared > 0 && differing == 0, std::to_string(compared) + " CSV files compared, " +
                                              std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"solver convergence", solver_convergence},
      {"energy dissipation", energy_dissipation},
      {"H-1 oracle", hminus1_oracle},
      {"adjoint correctness", adjoint_checks},
      {"desk-scale certification", desk_certification},
      {"region geometry", region_geometry},
      {"fixed-speed reconstruction", fixed_speed_reconstruction},
      {"relaxation discipline", relaxation_discipline},
      {"reproducibility", reproducibility},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d %s: %s (%s)\n", index, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
