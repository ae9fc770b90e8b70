#include "patlab/wave.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patlab/errors.hpp"

namespace patlab {

void SolverConfig::validate() const {
  if (!(final_time > 0.0) || !std::isfinite(final_time)) {
    throw ConfigError("solver final_time must be positive");
  }
  if (!(cfl_factor > 0.0) || cfl_factor > 0.5) {
    throw ConfigError("cfl_factor must lie in (0, 0.5], got " + std::to_string(cfl_factor));
  }
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
}

double default_observation_time(const Grid2D& grid, double c_low) {
  return 3.0 * grid.diameter() / c_low;
}

BoundaryImpedance::BoundaryImpedance(const Grid2D& grid, std::vector<double> gamma)
    : gamma_(std::move(gamma)) {
  if (gamma_.size() != grid.boundary_size()) {
    throw ConfigError("impedance needs one value per boundary node");
  }
  for (double g : gamma_) {
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("impedance must be positive");
  }
}

BoundaryImpedance BoundaryImpedance::uniform(const Grid2D& grid, double gamma) {
  return BoundaryImpedance(grid, std::vector<double>(grid.boundary_size(), gamma));
}

BoundaryImpedance BoundaryImpedance::lossless(const Grid2D& grid) {
  return BoundaryImpedance(std::vector<double>(grid.boundary_size(), 0.0), true);
}

TimeStepping cfl_timestep(const Grid2D& grid, const WaveSpeed& c, const SolverConfig& cfg) {
  cfg.validate();
  require_same_grid(grid, c.grid(), "cfl_timestep");
  double c_ref = c.max();
  if (cfg.reference_speed > 0.0) {
    if (cfg.reference_speed < c_ref) {
      throw ConfigError("reference_speed is below the maximum wave speed");
    }
    c_ref = cfg.reference_speed;
  }
  const double dt_max = cfg.cfl_factor * std::min(grid.hx(), grid.hy()) / c_ref;
  const double chunk = dt_max * static_cast<double>(cfg.record_stride);
  const auto chunks = static_cast<std::size_t>(std::ceil(cfg.final_time / chunk - 1e-9));
  TimeStepping ts;
  ts.record_stride = cfg.record_stride;
  ts.n_steps = std::max<std::size_t>(1, chunks) * cfg.record_stride;
  ts.dt = cfg.final_time / static_cast<double>(ts.n_steps);
  return ts;
}

namespace {

constexpr double kBlowUp = 1e12;

/// Diagonal mass/damping data and the symmetric stiffness of the semi-discrete
/// system  D u'' + G u' + K u = 0  with D = W c^-2, G = B gamma.
class WaveOperator {
 public:
  WaveOperator(const WaveSpeed& c, const BoundaryImpedance& gamma)
      : grid_(c.grid()), n_(grid_.size()), area_(n_), mass_(n_), damping_(n_, 0.0),
        kx_(grid_.ny()), ky_(grid_.nx()) {
    if (gamma.values().size() != grid_.boundary_size()) {
      throw GeometryMismatchError("impedance does not match the speed grid");
    }
    for (std::size_t j = 0; j < grid_.ny(); ++j) {
      for (std::size_t i = 0; i < grid_.nx(); ++i) {
        const std::size_t k = grid_.index(i, j);
        area_[k] = grid_.area_weight(i, j);
        const double ck = c.field()[k];
        mass_[k] = area_[k] / (ck * ck);
      }
    }
    const auto nodes = grid_.boundary_nodes();
    const auto arc = grid_.boundary_weights();
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      damping_[nodes[b]] = arc[b] * gamma.values()[b];
    }
    for (std::size_t j = 0; j < grid_.ny(); ++j) kx_[j] = grid_.weight_y(j) / grid_.hx();
    for (std::size_t i = 0; i < grid_.nx(); ++i) ky_[i] = grid_.weight_x(i) / grid_.hy();
  }

  const Grid2D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return n_; }
  const std::vector<double>& area() const noexcept { return area_; }
  const std::vector<double>& mass() const noexcept { return mass_; }
  const std::vector<double>& damping() const noexcept { return damping_; }

  /// out = K u, the edge-based discrete Dirichlet form.
  void stiffness(const std::vector<double>& u, std::vector<double>& out) const {
    const std::size_t nx = grid_.nx();
    const std::size_t ny = grid_.ny();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < ny; ++j) {
      const double a = kx_[j];
      const std::size_t row = j * nx;
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        const double d = a * (u[row + i] - u[row + i + 1]);
        out[row + i] += d;
        out[row + i + 1] -= d;
      }
    }
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const std::size_t row = j * nx;
      for (std::size_t i = 0; i < nx; ++i) {
        const double d = ky_[i] * (u[row + i] - u[row + nx + i]);
        out[row + i] += d;
        out[row + nx + i] -= d;
      }
    }
  }

 private:
  Grid2D grid_;
  std::size_t n_;
  std::vector<double> area_;
  std::vector<double> mass_;
  std::vector<double> damping_;
  std::vector<double> kx_;
  std::vector<double> ky_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

ScalarField2D as_field(const Grid2D& g, std::vector<double> v) {
  return ScalarField2D(g, std::move(v));
}

void check_inputs(const WaveSpeed& c, const InitialState& s) {
  require_same_grid(c.grid(), s.grid(), "simulate");
}

}  // namespace

SimulationResult simulate(const WaveSpeed& c, const BoundaryImpedance& gamma,
                          const InitialState& s, const SolverConfig& cfg) {
  check_inputs(c, s);
  const TimeStepping ts = cfl_timestep(c.grid(), c, cfg);
  const WaveOperator op(c, gamma);
  const Grid2D& grid = op.grid();
  const std::size_t n = op.size();
  const double dt = ts.dt;
  const double dt2 = dt * dt;
  const auto& D = op.mass();
  const auto& G = op.damping();

  std::vector<double> a_plus(n);
  std::vector<double> a_minus(n);
  for (std::size_t k = 0; k < n; ++k) {
    a_plus[k] = D[k] + 0.5 * dt * G[k];
    a_minus[k] = D[k] - 0.5 * dt * G[k];
  }

  const auto nodes = grid.boundary_nodes();
  const std::size_t nb = nodes.size();
  std::vector<double> trace;
  trace.reserve(ts.n_records() * nb);
  auto record = [&](std::size_t level, const std::vector<double>& u) {
    if (level % ts.record_stride != 0) return;
    for (std::size_t b = 0; b < nb; ++b) trace.push_back(u[nodes[b]]);
  };

  SimulationResult result{BoundaryTrace::zeros(grid, ts.dt_record(), 1), {}, {}, ts, {}, {}};
  result.discrete_energy.reserve(ts.n_steps);
  if (cfg.keep_history) result.history.reserve(ts.n_steps + 1);

  auto snapshot = [&](std::size_t level, const std::vector<double>& u,
                      std::vector<double> u_dot) {
    if (cfg.snapshot_stride == 0 || level % cfg.snapshot_stride != 0) return;
    result.snapshots.push_back({dt * static_cast<double>(level), as_field(grid, u),
                                as_field(grid, std::move(u_dot))});
  };

  std::vector<double> u_prev(s.u0().values().begin(), s.u0().values().end());
  const std::vector<double> u1(s.u1().values().begin(), s.u1().values().end());
  std::vector<double> ku(n);
  std::vector<double> u_cur(n);
  std::vector<double> u_next(n);

  // Startup from a fictitious level -1 chosen so the centred rate at t=0 equals u1.
  op.stiffness(u_prev, ku);
  for (std::size_t k = 0; k < n; ++k) {
    u_cur[k] = u_prev[k] + dt * u1[k] - 0.5 * dt2 * (ku[k] + G[k] * u1[k]) / D[k];
  }
  record(0, u_prev);
  if (cfg.keep_history) {
    result.history.push_back(u_prev);
    result.initial_rate = u1;
  }
  snapshot(0, u_prev, u1);

  auto half_step_energy = [&](const std::vector<double>& lo, const std::vector<double>& hi,
                              const std::vector<double>& k_lo) {
    double kinetic = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = (hi[k] - lo[k]) / dt;
      kinetic += D[k] * v * v;
    }
    return 0.5 * kinetic + 0.5 * dot(hi, k_lo);
  };
  result.discrete_energy.push_back(half_step_energy(u_prev, u_cur, ku));

  for (std::size_t level = 1; level < ts.n_steps; ++level) {
    op.stiffness(u_cur, ku);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      u_next[k] = (2.0 * D[k] * u_cur[k] - dt2 * ku[k] - a_minus[k] * u_prev[k]) / a_plus[k];
      peak = std::max(peak, std::abs(u_next[k]));
    }
    if (!(peak <= kBlowUp)) throw BlowUpError(level + 1);
    result.discrete_energy.push_back(half_step_energy(u_cur, u_next, ku));

    record(level, u_cur);
    if (cfg.keep_history) result.history.push_back(u_cur);
    if (cfg.snapshot_stride != 0 && level % cfg.snapshot_stride == 0) {
      std::vector<double> rate(n);
      for (std::size_t k = 0; k < n; ++k) rate[k] = (u_next[k] - u_prev[k]) / (2.0 * dt);
      snapshot(level, u_cur, std::move(rate));
    }
    std::swap(u_prev, u_cur);
    std::swap(u_cur, u_next);
  }

  const std::size_t last = ts.n_steps;
  record(last, u_cur);
  if (cfg.keep_history) result.history.push_back(u_cur);
  if (cfg.snapshot_stride != 0 && last % cfg.snapshot_stride == 0) {
    std::vector<double> rate(n);
    for (std::size_t k = 0; k < n; ++k) rate[k] = (u_cur[k] - u_prev[k]) / dt;
    snapshot(last, u_cur, std::move(rate));
  }

  result.trace = BoundaryTrace(grid, ts.dt_record(), ts.n_records(), std::move(trace));
  return result;
}

BoundaryTrace forward_map(const WaveSpeed& c, const BoundaryImpedance& gamma,
                          const InitialState& s, const SolverConfig& cfg) {
  SolverConfig plain = cfg;
  plain.snapshot_stride = 0;
  plain.keep_history = false;
  return simulate(c, gamma, s, plain).trace;
}

double energy(const WaveSnapshot& snap, const WaveSpeed& c) {
  require_same_grid(snap.u.grid(), c.grid(), "energy");
  const WaveOperator op(c, BoundaryImpedance::lossless(c.grid()));
  const std::vector<double> u(snap.u.values().begin(), snap.u.values().end());
  std::vector<double> ku(u.size());
  op.stiffness(u, ku);
  double kinetic = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    kinetic += op.mass()[k] * snap.u_dot[k] * snap.u_dot[k];
  }
  return 0.5 * (kinetic + dot(u, ku));
}

AdjointResult adjoint_simulate(const BoundaryTrace& residual, const WaveSpeed& c,
                               const BoundaryImpedance& gamma, const SolverConfig& cfg,
                               const SimulationResult* forward) {
  const TimeStepping ts = cfl_timestep(c.grid(), c, cfg);
  const WaveOperator op(c, gamma);
  const Grid2D& grid = op.grid();
  require_same_grid(grid, residual.grid(), "adjoint_simulate");
  if (residual.n_samples() != ts.n_records() ||
      std::abs(residual.dt_record() - ts.dt_record()) > 1e-12 * ts.dt_record()) {
    throw GeometryMismatchError("residual trace is not time-compatible with the solver config");
  }
  const bool with_sensitivity = forward != nullptr;
  if (with_sensitivity && forward->history.size() != ts.n_steps + 1) {
    throw ConfigError("forward run did not keep the time levels needed for the gradient");
  }

  const std::size_t n = op.size();
  const std::size_t nb = grid.boundary_size();
  const std::size_t nt = residual.n_samples();
  const double dt = ts.dt;
  const double dt2 = dt * dt;
  const auto& D = op.mass();
  const auto& G = op.damping();
  const auto nodes = grid.boundary_nodes();
  const auto arc = grid.boundary_weights();

  std::vector<double> a_plus(n);
  std::vector<double> a_minus(n);
  for (std::size_t k = 0; k < n; ++k) {
    a_plus[k] = D[k] + 0.5 * dt * G[k];
    a_minus[k] = D[k] - 0.5 * dt * G[k];
  }

  // Adds the trace-pairing source of time level `level` into bar.
  auto inject = [&](std::size_t level, std::vector<double>& bar) {
    if (level % ts.record_stride != 0) return;
    const std::size_t rk = level / ts.record_stride;
    const double wt =
        (rk == 0 || rk + 1 == nt) ? 0.5 * residual.dt_record() : residual.dt_record();
    const auto r = residual.at_time(rk);
    for (std::size_t b = 0; b < nb; ++b) bar[nodes[b]] += wt * arc[b] * r[b];
  };

  AdjointResult out{ScalarField2D::zeros(grid), ScalarField2D::zeros(grid), {}, {}};
  if (with_sensitivity) out.sensitivity_inv_c2.assign(n, 0.0);
  std::vector<double> q(n);
  for (std::size_t k = 0; k < n; ++k) q[k] = D[k] / op.area()[k];

  auto adjoint_snapshot = [&](std::size_t level, const std::vector<double>& z) {
    if (cfg.snapshot_stride == 0 || level % cfg.snapshot_stride != 0) return;
    out.snapshots.push_back({dt * static_cast<double>(level), as_field(grid, z)});
  };

  const std::size_t N = ts.n_steps;
  std::vector<double> bar_next(n, 0.0);
  std::vector<double> bar_cur(n, 0.0);
  std::vector<double> bar_prev(n, 0.0);
  std::vector<double> z(n);
  std::vector<double> kz(n);
  inject(N, bar_next);
  inject(N - 1, bar_cur);

  for (std::size_t level = N - 1; level >= 1; --level) {
    std::fill(bar_prev.begin(), bar_prev.end(), 0.0);
    inject(level - 1, bar_prev);
    double peak = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      z[k] = bar_next[k] / a_plus[k];
      peak = std::max(peak, std::abs(z[k]));
    }
    if (!(peak <= kBlowUp)) throw BlowUpError(level);
    op.stiffness(z, kz);
    for (std::size_t k = 0; k < n; ++k) {
      bar_cur[k] += 2.0 * D[k] * z[k] - dt2 * kz[k];
      bar_prev[k] -= a_minus[k] * z[k];
    }
    if (with_sensitivity) {
      const auto& um = forward->history[level - 1];
      const auto& u0 = forward->history[level];
      const auto& up = forward->history[level + 1];
      for (std::size_t k = 0; k < n; ++k) {
        out.sensitivity_inv_c2[k] += z[k] * op.area()[k] * (2.0 * u0[k] - um[k] - up[k]);
      }
    }
    adjoint_snapshot(level, z);
    std::swap(bar_next, bar_cur);
    std::swap(bar_cur, bar_prev);
  }

  // Transpose of the startup step; bar_next holds level 1, bar_cur level 0.
  for (std::size_t k = 0; k < n; ++k) z[k] = bar_next[k] / D[k];
  op.stiffness(z, kz);
  std::vector<double> g0(n);
  std::vector<double> g1(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double bar0 = bar_cur[k] + bar_next[k] - 0.5 * dt2 * kz[k];
    const double bar1 = dt * bar_next[k] - 0.5 * dt2 * G[k] * z[k];
    g0[k] = bar0 / op.area()[k];
    g1[k] = bar1 / op.area()[k];
  }
  if (with_sensitivity) {
    const auto& u0 = forward->history[0];
    const auto& u1 = forward->history[1];
    const auto& rate = forward->initial_rate;
    for (std::size_t k = 0; k < n; ++k) {
      const double r0 = rate.empty() ? 0.0 : rate[k];
      out.sensitivity_inv_c2[k] -= bar_next[k] * (u1[k] - u0[k] - dt * r0) / q[k];
    }
  }
  adjoint_snapshot(0, z);
  out.grad_u0 = as_field(grid, std::move(g0));
  out.grad_u1 = as_field(grid, std::move(g1));
  return out;
}

}  // namespace patlab
