#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patlab/errors.hpp"
#include "patlab/field.hpp"
#include "patlab/trace.hpp"
#include "patlab/wave.hpp"

namespace patlab {

/// Bilinear interpolation from a coarse node mesh spanning the same
/// rectangle as the fine grid.
class SpeedParametrization {
 public:
  SpeedParametrization(const Grid2D& fine, std::size_t coarse_nx, std::size_t coarse_ny);

  std::size_t size() const noexcept { return coarse_nx_ * coarse_ny_; }
  std::size_t coarse_nx() const noexcept { return coarse_nx_; }
  std::size_t coarse_ny() const noexcept { return coarse_ny_; }
  const Grid2D& fine_grid() const noexcept { return fine_; }

  /// Coarse coefficients -> fine nodal values.
  std::vector<double> prolong(std::span<const double> coarse) const;
  /// Exact transpose of prolong(): bilinear-weighted local sums of fine values.
  std::vector<double> restrict_transpose(std::span<const double> fine) const;

 private:
  struct Stencil {
    std::size_t c00, c10, c01, c11;
    double w00, w10, w01, w11;
  };
  Grid2D fine_;
  std::size_t coarse_nx_;
  std::size_t coarse_ny_;
  std::vector<Stencil> stencils_;
};

/// c_cur + prolong(update), clamped pointwise into [c_low, c_high].
WaveSpeed project_speed(std::span<const double> coarse_update, const WaveSpeed& c_cur,
                        const SpeedParametrization& param);

struct ReconstructionConfig {
  double step_u = 0.0;  ///< <= 0: 1 / |Lambda|^2 from power iteration
  double step_c = 0.0;  ///< <= 0: one-shot line search at the first speed update
  std::size_t max_iter = 200;
  double tol_misfit = 1e-6;  ///< relative to |m|
  std::size_t coarse_nx = 8;
  std::size_t coarse_ny = 8;
  bool nesterov = false;
  double epsilon = 1e-2;
  bool enforce_relaxation = true;
  std::size_t window = 5;
  /// Applied to the speed step after it has been chosen (stress experiments).
  double step_c_scale = 1.0;

  void validate(const Grid2D& grid) const;
};

struct IterateRecord {
  std::size_t iter = 0;
  double misfit = 0.0;
  double err_u_rel = std::numeric_limits<double>::quiet_NaN();
  double err_c_rel = std::numeric_limits<double>::quiet_NaN();
  double step_u = 0.0;
  double step_c = 0.0;
  double alpha_u = std::numeric_limits<double>::quiet_NaN();
  double beta_u = std::numeric_limits<double>::quiet_NaN();
  double alpha_c = std::numeric_limits<double>::quiet_NaN();
  double beta_c = std::numeric_limits<double>::quiet_NaN();
  /// H0 norms of the last iterate increments (blind-mode contraction proxy).
  double inc_u = std::numeric_limits<double>::quiet_NaN();
  double inc_c = std::numeric_limits<double>::quiet_NaN();
  std::optional<bool> in_region;
};

struct IterateHistory {
  std::vector<IterateRecord> records;
  std::vector<std::string> warnings;
};

/// A diverging iteration; carries the history up to the failure.
class DivergenceError : public StepSizeError {
 public:
  DivergenceError(const std::string& what, IterateHistory history)
      : StepSizeError(what), history_(std::move(history)) {}
  const IterateHistory& history() const noexcept { return history_; }

 private:
  IterateHistory history_;
};

struct ContractionReport {
  double alpha_u = std::numeric_limits<double>::quiet_NaN();
  double beta_u = std::numeric_limits<double>::quiet_NaN();
  double alpha_c = std::numeric_limits<double>::quiet_NaN();
  double beta_c = std::numeric_limits<double>::quiet_NaN();
  bool valid_u = false;  ///< all ratios in (0, 1]
  bool valid_c = false;
  bool exact_u = false;  ///< a zero error was hit inside the window
  bool exact_c = false;
  std::size_t ratios = 0;
};

/// Ratios e_{n+1} / e_n over the trailing `window` ratios of each sequence;
/// alpha = min, beta = max. Needs at least 3 entries.
ContractionReport contraction_factors(std::span<const double> err_u, std::span<const double> err_c,
                                      std::size_t window);

enum class ContractionSource { truth, increments };

ContractionReport contraction_factors(const IterateHistory& history, std::size_t window,
                                      ContractionSource source, std::size_t first_record = 0);

struct StepSizes {
  double step_u = 0.0;
  double step_c = 0.0;
};

struct RelaxationDecision {
  StepSizes steps;
  bool adjusted = false;
  bool saturated = false;
  std::string warning;
};

/// Keeps the speed iterates contracting at least as fast as the slowest
/// pressure contraction (beta_c <= alpha_u). On violation the speed step is
/// halved and the pressure step is relaxed so the predicted pressure factor
/// reaches the predicted speed factor. Steps never exceed `max_steps` and
/// never drop below `min_steps`; hitting a floor sets `saturated`.
RelaxationDecision enforce_relaxation(const ContractionReport& report, StepSizes current,
                                      StepSizes max_steps, StepSizes min_steps);

struct GroundTruth {
  ScalarField2D u0;
  std::optional<WaveSpeed> c;
};

using CheckpointFn =
    std::function<void(std::size_t iter, const ScalarField2D& u0, const WaveSpeed& c)>;

/// 1 / |Lambda|^2 with |Lambda|^2 estimated by power iteration on Lambda* Lambda.
double estimate_landweber_step(const WaveSpeed& c, const BoundaryImpedance& gamma,
                               const SolverConfig& cfg, std::size_t iterations = 20);

struct PressureResult {
  ScalarField2D u0;
  IterateHistory history;
  double step_u = 0.0;
};

/// Landweber iteration u <- u + step_u * Lambda*(m - Lambda u) for fixed c with
/// u1 = 0; boundary values are held at zero. Throws DivergenceError after 5
/// consecutive misfit increases.
PressureResult reconstruct_pressure(const BoundaryTrace& m, const WaveSpeed& c,
                                    const BoundaryImpedance& gamma, const SolverConfig& solver,
                                    const ReconstructionConfig& cfg,
                                    const GroundTruth* truth = nullptr,
                                    const ScalarField2D* initial = nullptr,
                                    const CheckpointFn& checkpoint = {},
                                    std::size_t checkpoint_stride = 0);

/// Gradient of 1/2 |Lambda_c u - m|^2 with respect to the coarse speed
/// coefficients, for residual = m - Lambda_c u from `forward` (which must
/// keep its history). Assembled from sum_n lambda * (u^{n+1} - 2u^n + u^{n-1}).
std::vector<double> gradient_wavespeed(const SimulationResult& forward,
                                       const BoundaryTrace& residual, const WaveSpeed& c,
                                       const BoundaryImpedance& gamma, const SolverConfig& solver,
                                       const SpeedParametrization& param);

/// Convenience overload that reruns the forward map for u0_cur.
std::vector<double> gradient_wavespeed(const ScalarField2D& u0_cur, const WaveSpeed& c,
                                       const BoundaryTrace& residual,
                                       const BoundaryImpedance& gamma, const SolverConfig& solver,
                                       const SpeedParametrization& param);

struct JointResult {
  ScalarField2D u0;
  WaveSpeed c;
  IterateHistory history;
};

/// Alternating pressure Landweber sweeps and projected coarse speed gradient
/// steps, with optional Nesterov momentum on the speed and relaxation
/// enforcement from the contraction monitor.
JointResult joint_reconstruct(const BoundaryTrace& m, const ScalarField2D& u0_guess,
                              const WaveSpeed& c_guess, const BoundaryImpedance& gamma,
                              const SolverConfig& solver, const ReconstructionConfig& cfg,
                              const GroundTruth* truth = nullptr, const CheckpointFn& checkpoint = {},
                              std::size_t checkpoint_stride = 0);

}  // namespace patlab
