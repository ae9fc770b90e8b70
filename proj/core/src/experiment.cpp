#include "patlab/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "patlab/errors.hpp"
#include "patlab/io.hpp"
#include "patlab/parallel.hpp"
#include "patlab/rng.hpp"

namespace fs = std::filesystem;

namespace patlab {

std::size_t default_worker_count() {
  if (const char* env = std::getenv("PAT_LAB_WORKERS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

std::string num(double v) { return io::format_number(v); }

std::string flag(const std::optional<bool>& b) {
  if (!b) return "na";
  return *b ? "true" : "false";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

/// The CFL reference every run of an experiment shares, so traces for
/// different admissible speeds live on one time grid.
SolverConfig experiment_solver(const ExperimentConfig& cfg, const WaveSpeed& c) {
  SolverConfig s = cfg.resolved_solver();
  s.reference_speed = c.c_high();
  return s;
}

}  // namespace

RunDirectory::RunDirectory(fs::path dir, const std::string& config_text, std::uint64_t seed,
                           const std::string& command)
    : dir_(std::move(dir)), seed_(seed), hash_(config_hash(config_text)), command_(command) {
  if (fs::exists(dir_)) {
    if (!fs::is_directory(dir_) || !fs::is_empty(dir_)) {
      throw Error("refusing to reuse non-empty output directory " + dir_.string());
    }
  } else {
    fs::create_directories(dir_);
  }
  write_text("config.ini", config_text);
  finish();
}

std::string RunDirectory::footer() const {
  return "# seed=" + std::to_string(seed_) + ",config_hash=" + hex(hash_) + "\n";
}

fs::path RunDirectory::output(const std::string& name) {
  const fs::path p = dir_ / name;
  if (fs::exists(p)) throw Error("refusing to overwrite " + p.string());
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  outputs_.push_back(name);
  return p;
}

void RunDirectory::write_text(const std::string& name, const std::string& content) {
  std::ofstream out = open_output(output(name));
  out << content;
}

void RunDirectory::note(const std::string& line) { notes_.push_back(line); }

void RunDirectory::finish() const {
  std::ofstream out = open_output(dir_ / "manifest.txt");
  out << "command=" << command_ << "\n";
  out << "seed=" << seed_ << "\n";
  out << "config_hash=" << hex(hash_) << "\n";
  for (const auto& o : outputs_) out << "output=" << o << "\n";
  for (const auto& n : notes_) out << "note=" << n << "\n";
}

InitialState truth_state(const ExperimentConfig& cfg, const Grid2D& grid) {
  return make_pressure_phantom(cfg.pressure, grid);
}

WaveSpeed truth_speed(const ExperimentConfig& cfg, const Grid2D& grid) {
  return make_speed_phantom(cfg.speed_shape, grid, cfg.speed);
}

std::vector<std::pair<double, double>> ensemble_targets(const ExperimentConfig& cfg, double epsilon) {
  const PerturbationConfig& p = cfg.perturbation;
  std::vector<std::pair<double, double>> out;
  out.reserve(cfg.verify.members);
  for (std::size_t i = 0; i < cfg.verify.members; ++i) {
    if (p.mode == TargetMode::fixed) {
      out.emplace_back(p.speed_target, p.state_target);
      continue;
    }
    std::mt19937_64 gen(derive_seed(cfg.seed, i));
    std::uniform_real_distribution<double> dist(std::log(p.state_min), std::log(p.state_max));
    const double state = std::exp(dist(gen));
    out.emplace_back(p.speed_fraction * epsilon * state, state);
  }
  return out;
}

std::vector<EnsembleMember> build_ensemble(const ExperimentConfig& cfg, const Grid2D& grid,
                                           const std::vector<std::pair<double, double>>& targets,
                                           std::size_t workers) {
  const InitialState s = truth_state(cfg, grid);
  const WaveSpeed c = truth_speed(cfg, grid);
  std::vector<std::optional<EnsembleMember>> slots(targets.size());
  parallel_for(targets.size(), workers, [&](std::size_t i) {
    const std::uint64_t member_seed = derive_seed(derive_seed(cfg.seed, i), 1);
    PerturbedPair p = perturb_pair(c, s, targets[i].first, targets[i].second, member_seed);
    slots[i] = EnsembleMember{c, std::move(p.c_tilde), s, std::move(p.s_tilde)};
  });
  std::vector<EnsembleMember> out;
  out.reserve(slots.size());
  for (auto& m : slots) out.push_back(std::move(*m));
  return out;
}

void write_report_csv(std::ostream& out, const StabilityReport& report, double epsilon,
                      const std::string& footer) {
  (void)epsilon;
  out << "member,speed_ratio_sq,state_ratio_sq,meas_ratio_sq,in_region,quotient,degenerate,violation\n";
  for (const MemberOutcome& m : report.members) {
    out << m.index << ',' << num(m.report.speed_ratio_sq) << ',' << num(m.report.state_ratio_sq)
        << ',' << num(m.report.meas_ratio_sq) << ',' << (m.report.in_region ? "true" : "false")
        << ',' << num(m.report.empirical_quotient) << ',' << (m.degenerate ? "true" : "false")
        << ',' << (m.violation ? "true" : "false") << '\n';
  }
  out << footer;
}

void write_history_csv(std::ostream& out, const IterateHistory& history, const std::string& footer) {
  out << "iter,misfit,err_u_rel,err_c_rel,step_u,step_c,alpha_u,beta_u,alpha_c,beta_c,in_region\n";
  for (const IterateRecord& r : history.records) {
    out << r.iter << ',' << num(r.misfit) << ',' << num(r.err_u_rel) << ',' << num(r.err_c_rel)
        << ',' << num(r.step_u) << ',' << num(r.step_c) << ',' << num(r.alpha_u) << ','
        << num(r.beta_u) << ',' << num(r.alpha_c) << ',' << num(r.beta_c) << ','
        << flag(r.in_region) << '\n';
  }
  out << footer;
}

int cmd_simulate(const ExperimentConfig& cfg, RunDirectory& run, std::ostream& log) {
  const Grid2D grid = cfg.grid();
  const InitialState s = truth_state(cfg, grid);
  const WaveSpeed c = truth_speed(cfg, grid);
  const auto gamma = BoundaryImpedance::uniform(grid, cfg.gamma);
  const SolverConfig solver = experiment_solver(cfg, c);
  const SimulationResult res = simulate(c, gamma, s, solver);

  io::write_trace(run.output("trace.patt"), res.trace);
  {
    std::ofstream out = open_output(run.output("trace.csv"));
    io::write_trace_csv(out, res.trace);
    out << run.footer();
  }
  io::write_field(run.output("u0.patf"), s.u0());
  io::write_field(run.output("speed.patf"), c.field());
  {
    std::ofstream out = open_output(run.output("energy.csv"));
    out << "step,t,energy\n";
    for (std::size_t n = 0; n < res.discrete_energy.size(); ++n) {
      out << n << ',' << num((static_cast<double>(n) + 0.5) * res.time.dt) << ','
          << num(res.discrete_energy[n]) << '\n';
    }
    out << run.footer();
  }
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    std::ostringstream name;
    name << "snapshots/u_" << std::setw(6) << std::setfill('0') << k << ".patf";
    io::write_field(run.output(name.str()), res.snapshots[k].u);
  }

  double max_rise = 0.0;
  for (std::size_t n = 1; n < res.discrete_energy.size(); ++n) {
    max_rise = std::max(max_rise, res.discrete_energy[n] - res.discrete_energy[n - 1]);
  }
  const double e0 = res.discrete_energy.empty() ? 0.0 : res.discrete_energy.front();
  const double e1 = res.discrete_energy.empty() ? 0.0 : res.discrete_energy.back();
  log << "steps " << res.time.n_steps << ", dt " << num(res.time.dt) << ", T "
      << num(solver.final_time) << "\n";
  log << "energy initial " << num(e0) << ", final " << num(e1) << ", max increase "
      << num(max_rise) << "\n";
  run.finish();
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, RunDirectory& run, std::size_t workers,
               std::ostream& log) {
  const Grid2D grid = cfg.grid();
  const double eps = cfg.verify.epsilon;
  const auto members = build_ensemble(cfg, grid, ensemble_targets(cfg, eps), workers);
  const auto gamma = BoundaryImpedance::uniform(grid, cfg.gamma);
  StabilityOptions opts;
  opts.epsilon = eps;
  opts.k = cfg.verify.k;
  opts.K = cfg.verify.K;
  opts.workers = workers;
  opts.state_threshold = cfg.verify.state_threshold;
  opts.meas_threshold = cfg.verify.meas_threshold;
  const StabilityReport rep =
      stability_report(members, gamma, experiment_solver(cfg, members.front().c), opts);

  {
    std::ofstream out = open_output(run.output("report.csv"));
    write_report_csv(out, rep, eps, run.footer());
  }
  {
    std::ofstream out = open_output(run.output("summary.csv"));
    out << "n_pairs,pairs_in_region,degenerate,violations,epsilon,k,K,final_time,c_empirical\n";
    out << rep.n_pairs << ',' << rep.pairs_in_region << ',' << rep.degenerate << ','
        << rep.violations << ',' << num(eps) << ',' << num(rep.k) << ',' << num(rep.K) << ','
        << num(rep.final_time) << ',' << num(rep.c_empirical) << '\n';
    out << run.footer();
  }
  for (const auto& n : rep.notes) {
    run.note(n);
    log << "note: " << n << "\n";
  }
  log << rep.n_pairs << " pairs, " << rep.violations << " violations, empirical constant "
      << num(rep.c_empirical) << "\n";
  run.finish();
  return rep.violations == 0 ? 0 : 1;
}

int cmd_reconstruct(const ExperimentConfig& cfg, RunDirectory& run, std::ostream& log) {
  const Grid2D grid = cfg.grid();
  const InitialState s = truth_state(cfg, grid);
  const WaveSpeed c_true = truth_speed(cfg, grid);
  const auto gamma = BoundaryImpedance::uniform(grid, cfg.gamma);
  const SolverConfig solver = experiment_solver(cfg, c_true);
  const ReconstructRunConfig& rc = cfg.reconstruct;

  BoundaryTrace m = forward_map(c_true, gamma, s, solver);
  if (rc.noise_level > 0.0) {
    std::mt19937_64 gen(derive_seed(cfg.seed, 0x6e6f697365ull));
    std::normal_distribution<double> dist(0.0, 1.0);
    double peak = 0.0;
    for (double v : m.samples()) peak = std::max(peak, std::abs(v));
    std::vector<double> noisy(m.samples().begin(), m.samples().end());
    for (double& v : noisy) v += rc.noise_level * peak * dist(gen);
    m = BoundaryTrace(grid, m.dt_record(), m.n_samples(), std::move(noisy));
  }

  GroundTruth truth{s.u0(), c_true};
  const GroundTruth* monitor = rc.monitor_truth ? &truth : nullptr;
  const ScalarField2D u_init = rc.pressure_init == "truth" ? s.u0() : ScalarField2D::zeros(grid);

  CheckpointFn checkpoint = [&](std::size_t n, const ScalarField2D& u, const WaveSpeed& c) {
    std::ostringstream tag;
    tag << std::setw(6) << std::setfill('0') << n;
    io::write_field(run.output("checkpoints/u0_" + tag.str() + ".patf"), u);
    io::write_field(run.output("checkpoints/c_" + tag.str() + ".patf"), c.field());
  };

  IterateHistory history;
  ScalarField2D u_final = u_init;
  WaveSpeed c_final = c_true;
  int code = 0;
  try {
    if (rc.mode == ReconstructMode::fixed_speed) {
      PressureResult r = reconstruct_pressure(m, c_true, gamma, solver, rc.params, monitor, &u_init,
                                              checkpoint, rc.checkpoint_stride);
      history = std::move(r.history);
      u_final = std::move(r.u0);
    } else {
      WaveSpeed c_init =
          rc.speed_init == "truth"
              ? c_true
              : WaveSpeed::constant(grid, std::clamp(rc.c_init, c_true.c_low(), c_true.c_high()),
                                    c_true.c_low(), c_true.c_high());
      JointResult r = joint_reconstruct(m, u_init, c_init, gamma, solver, rc.params, monitor,
                                        checkpoint, rc.checkpoint_stride);
      history = std::move(r.history);
      u_final = std::move(r.u0);
      c_final = std::move(r.c);
    }
  } catch (const DivergenceError& e) {
    history = e.history();
    run.note(e.what());
    log << "error: " << e.what() << "\n";
    code = 2;
  }

  {
    std::ofstream out = open_output(run.output("history.csv"));
    write_history_csv(out, history, run.footer());
  }
  if (code == 0) {
    io::write_field(run.output("u0_final.patf"), u_final);
    if (rc.mode == ReconstructMode::joint) io::write_field(run.output("c_final.patf"), c_final.field());
  }
  for (const auto& w : history.warnings) {
    run.note(w);
    log << "warning: " << w << "\n";
  }
  if (!history.records.empty()) {
    const IterateRecord& last = history.records.back();
    log << history.records.size() << " records, final misfit " << num(last.misfit)
        << ", err_u_rel " << num(last.err_u_rel) << ", err_c_rel " << num(last.err_c_rel) << "\n";
  }
  run.finish();
  return code;
}

int cmd_sweep(const ExperimentConfig& cfg, RunDirectory& run, std::size_t workers,
              std::ostream& log) {
  const SweepConfig& sw = cfg.sweep;
  const std::vector<double> eps_list = sw.epsilon.empty() ? std::vector<double>{cfg.verify.epsilon}
                                                          : sw.epsilon;
  const std::vector<std::size_t> cell_list =
      sw.cells.empty() ? std::vector<std::size_t>{cfg.cells} : sw.cells;
  // Target pairs; an empty list falls back to the [perturbation] section.
  std::vector<std::optional<std::pair<double, double>>> target_list;
  if (sw.state_target.empty() && sw.speed_target.empty()) {
    target_list.push_back(std::nullopt);
  } else {
    const auto states = sw.state_target.empty() ? std::vector<double>{cfg.perturbation.state_target}
                                                : sw.state_target;
    const auto speeds = sw.speed_target.empty() ? std::vector<double>{cfg.perturbation.speed_target}
                                                : sw.speed_target;
    for (double st : states) {
      for (double sp : speeds) target_list.emplace_back(std::make_pair(sp, st));
    }
  }

  std::ofstream out = open_output(run.output("sweep.csv"));
  out << "cell,cells,epsilon,state_target,speed_target,members,in_region,degenerate,violations,"
         "c_empirical,status\n";
  std::size_t cell = 0;
  std::size_t failed = 0;
  std::size_t violations = 0;
  for (std::size_t cells : cell_list) {
    ExperimentConfig local = cfg;
    local.cells = cells;
    const Grid2D grid = local.grid();
    const auto gamma = BoundaryImpedance::uniform(grid, cfg.gamma);
    for (const auto& tgt : target_list) {
      // The ensemble is drawn once per (grid, targets) and judged at every epsilon.
      std::vector<std::pair<double, double>> targets;
      if (tgt) {
        targets.assign(cfg.verify.members, *tgt);
      } else {
        targets = ensemble_targets(cfg, cfg.verify.epsilon);
      }
      std::vector<EnsembleMember> members;
      std::string build_error;
      try {
        members = build_ensemble(local, grid, targets, workers);
      } catch (const std::exception& e) {
        build_error = e.what();
      }
      for (double eps : eps_list) {
        const std::string state_col = tgt ? num(tgt->second) : "config";
        const std::string speed_col = tgt ? num(tgt->first) : "config";
        out << cell << ',' << cells << ',' << num(eps) << ',' << state_col << ',' << speed_col << ',';
        try {
          if (!build_error.empty()) throw Error(build_error);
          std::vector<EnsembleMember> inside;
          std::size_t degenerate = 0;
          for (const auto& m : members) {
            const double sr = speed_discrepancy_ratio(m.c, m.c_tilde);
            const double ur = state_discrepancy_ratio(m.s, m.s_tilde);
            if (sr == 0.0 && ur == 0.0) {
              ++degenerate;
            } else if (region_verdict(sr, ur, eps)) {
              inside.push_back(m);
            }
          }
          StabilityReport rep;
          if (!inside.empty()) {
            StabilityOptions opts;
            opts.epsilon = eps;
            opts.k = cfg.verify.k;
            opts.K = cfg.verify.K;
            opts.workers = workers;
            opts.state_threshold = cfg.verify.state_threshold;
            opts.meas_threshold = cfg.verify.meas_threshold;
            rep = stability_report(inside, gamma, experiment_solver(local, inside.front().c), opts);
          }
          violations += rep.violations;
          out << members.size() << ',' << inside.size() << ',' << degenerate << ','
              << rep.violations << ','
              << (inside.empty() ? num(std::numeric_limits<double>::quiet_NaN())
                                 : num(rep.c_empirical))
              << ",ok\n";
        } catch (const std::exception& e) {
          ++failed;
          out << targets.size() << ",0,0,0," << num(std::numeric_limits<double>::quiet_NaN())
              << ",failed\n";
          run.note("failed_cell=" + std::to_string(cell) + ": " + e.what());
          log << "cell " << cell << " failed: " << e.what() << "\n";
        }
        ++cell;
      }
    }
  }
  out << run.footer();
  out.close();
  log << cell << " cells, " << failed << " failed, " << violations << " violations\n";
  run.finish();
  if (failed > 0) return 2;
  return violations == 0 ? 0 : 1;
}

int run_command(const std::string& command, const RunOptions& opts, std::ostream& log,
                std::ostream& err) {
  try {
    const std::string text = read_file(opts.config_path);
    ExperimentConfig cfg = load_experiment_config(text);
    if (opts.seed) {
      cfg.seed = *opts.seed;
      cfg.pressure.seed = cfg.seed;
      cfg.speed_shape.seed = cfg.seed;
    }
    std::size_t workers = opts.workers.value_or(cfg.workers);
    if (workers == 0) workers = default_worker_count();

    fs::path out_dir;
    if (opts.out_dir) {
      out_dir = *opts.out_dir;
    } else if (!cfg.output_dir.empty()) {
      out_dir = cfg.output_dir;
    } else {
      out_dir = "pat-lab-" + command + "-" + hex(config_hash(text)).substr(0, 8);
    }
    if (command != "simulate" && command != "verify" && command != "reconstruct" &&
        command != "sweep") {
      throw ConfigError("unknown command '" + command + "'");
    }
    RunDirectory run(out_dir, text, cfg.seed, command);
    if (command == "simulate") return cmd_simulate(cfg, run, log);
    if (command == "verify") return cmd_verify(cfg, run, workers, log);
    if (command == "reconstruct") return cmd_reconstruct(cfg, run, log);
    return cmd_sweep(cfg, run, workers, log);
  } catch (const std::exception& e) {
    err << "pat-lab " << command << ": " << e.what() << "\n";
    return 2;
  }
}

}  // namespace patlab
