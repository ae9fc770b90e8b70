#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "patlab/field.hpp"
#include "patlab/trace.hpp"

namespace patlab {

struct SolverConfig {
  double final_time = 1.0;
  double cfl_factor = 0.4;          ///< fraction of min(hx,hy)/max(c), in (0, 0.5]
  std::size_t record_stride = 1;    ///< time steps between trace samples
  std::size_t snapshot_stride = 0;  ///< time steps between full snapshots, 0 = none
  bool keep_history = false;        ///< retain every time level (gradient assembly)
  /// When positive, used instead of max(c) in the CFL formula so that runs
  /// with different speeds of one admissible class share a time grid.
  double reference_speed = 0.0;

  /// Throws ConfigError on invariant violations.
  void validate() const;
};

/// Conservative observation window 3 * diam / c_low used in place of a
/// non-trapping time computed from rays.
double default_observation_time(const Grid2D& grid, double c_low);

/// Impedance gamma per boundary node (same order as Grid2D::boundary_nodes()).
class BoundaryImpedance {
 public:
  /// Every entry must be positive.
  BoundaryImpedance(const Grid2D& grid, std::vector<double> gamma);
  static BoundaryImpedance uniform(const Grid2D& grid, double gamma);
  /// gamma = 0 everywhere; a lossless diagnostic outside the physical regime.
  static BoundaryImpedance lossless(const Grid2D& grid);

  std::span<const double> values() const noexcept { return gamma_; }
  bool is_lossless() const noexcept { return lossless_; }

 private:
  BoundaryImpedance(std::vector<double> gamma, bool lossless)
      : gamma_(std::move(gamma)), lossless_(lossless) {}
  std::vector<double> gamma_;
  bool lossless_ = false;
};

struct TimeStepping {
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::size_t record_stride = 1;
  double dt_record() const noexcept { return dt * static_cast<double>(record_stride); }
  std::size_t n_records() const noexcept { return n_steps / record_stride + 1; }
};

/// dt = cfl * min(hx,hy) / max(c), reduced so that final_time is an integer
/// multiple of dt * record_stride.
TimeStepping cfl_timestep(const Grid2D& grid, const WaveSpeed& c, const SolverConfig& cfg);

struct WaveSnapshot {
  double t = 0.0;
  ScalarField2D u;
  ScalarField2D u_dot;
};

struct SimulationResult {
  BoundaryTrace trace;
  std::vector<WaveSnapshot> snapshots;
  /// Leapfrog energy at the half steps t_{n+1/2}, n = 0..n_steps-1. It is
  /// exactly conserved for gamma = 0 and non-increasing for gamma >= 0.
  std::vector<double> discrete_energy;
  TimeStepping time;
  /// Every time level u^0..u^N when SolverConfig::keep_history is set.
  std::vector<std::vector<double>> history;
  /// u1 of the run, kept alongside the history.
  std::vector<double> initial_rate;
};

/// Leapfrog / 5-point scheme for c^-2 u_tt - Lap u = 0 with the impedance
/// condition d_nu u + gamma u_t = 0 eliminated through ghost nodes and a
/// time-centred u_t. Throws BlowUpError when |u| exceeds 1e12.
SimulationResult simulate(const WaveSpeed& c, const BoundaryImpedance& gamma,
                          const InitialState& s, const SolverConfig& cfg);

/// Boundary trace of simulate(); bit-identical for identical inputs.
BoundaryTrace forward_map(const WaveSpeed& c, const BoundaryImpedance& gamma,
                          const InitialState& s, const SolverConfig& cfg);

/// 1/2 * integral of c^-2 u_t^2 + |grad u|^2, the gradient term evaluated
/// with the solver's discrete Dirichlet form.
double energy(const WaveSnapshot& snap, const WaveSpeed& c);

struct AdjointSnapshot {
  double t = 0.0;
  ScalarField2D lambda;
};

struct AdjointResult {
  /// Riesz representers (H0 pairing) of r -> <Lambda(u0,u1), r>_trace.
  ScalarField2D grad_u0;
  ScalarField2D grad_u1;
  std::vector<AdjointSnapshot> snapshots;
  /// Derivative of <trace, r> with respect to nodal c^-2 values; filled
  /// only when the forward run kept its history.
  std::vector<double> sensitivity_inv_c2;
};

/// Discrete adjoint of the forward map with respect to the trace and state
/// H0 inner products: <Lambda d, r>_trace = <d, adjoint(r)>_H0 holds to
/// rounding. Runs the transposed time stepping backwards from T.
AdjointResult adjoint_simulate(const BoundaryTrace& residual, const WaveSpeed& c,
                               const BoundaryImpedance& gamma, const SolverConfig& cfg,
                               const SimulationResult* forward = nullptr);

}  // namespace patlab
