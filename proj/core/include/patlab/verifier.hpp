#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "patlab/field.hpp"
#include "patlab/trace.hpp"
#include "patlab/wave.hpp"

namespace patlab {

/// |c^-2 - c~^-2|^2_{W1,inf} / |c^-2|^2_{W1,inf}; the denominator always uses
/// the first argument.
double speed_discrepancy_ratio(const WaveSpeed& c, const WaveSpeed& c_tilde);

/// (|u0-u0~|^2_{H0} + |u1-u1~|^2_{H-1}) / (|u0|^2_{H0} + |u1|^2_{H-1}).
/// Throws DegenerateError when the reference state has zero mass.
double state_discrepancy_ratio(const InitialState& s, const InitialState& s_tilde);

/// |trace - trace~|^2_{H1(0,T;H0)} / |ref|^2_{H0}. Throws DegenerateError on a
/// zero reference trace.
double measurement_discrepancy_ratio(const BoundaryTrace& trace, const BoundaryTrace& trace_tilde,
                                     const BoundaryTrace& ref);

/// |grad u0|^2_{H0} + |u1|^2_{H0}.
double state_energy(const InitialState& s);
/// |u0|^2_{H0} + |u1|^2_{H-1}.
double state_mass(const InitialState& s);

struct DiscrepancyReport {
  double speed_ratio_sq = 0.0;
  double state_ratio_sq = 0.0;
  /// NaN until the forward maps have been evaluated.
  double meas_ratio_sq = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.0;
  bool in_region = false;
  /// state_ratio_sq * T / meas_ratio_sq; NaN when not evaluated, +inf when
  /// the measurement discrepancy vanishes.
  double empirical_quotient = std::numeric_limits<double>::quiet_NaN();
};

/// speed_ratio_sq <= epsilon * state_ratio_sq.
bool region_verdict(double speed_ratio_sq, double state_ratio_sq, double epsilon) noexcept;

DiscrepancyReport check_uniqueness_region(const WaveSpeed& c, const WaveSpeed& c_tilde,
                                          const InitialState& s, const InitialState& s_tilde,
                                          double epsilon);

StateBounds check_assumption_bounds(const InitialState& s, double k, double K);

struct EnsembleMember {
  WaveSpeed c;
  WaveSpeed c_tilde;
  InitialState s;
  InitialState s_tilde;
};

struct StabilityOptions {
  double epsilon = 1e-2;
  /// Non-positive values select k = half the family minimum of state_mass()
  /// and K = twice the family maximum of state_energy().
  double k = 0.0;
  double K = 0.0;
  std::size_t workers = 1;
  double state_threshold = 1e-4;
  double meas_threshold = 1e-16;
};

struct MemberOutcome {
  std::size_t index = 0;
  DiscrepancyReport report;
  bool degenerate = false;
  bool violation = false;
};

struct StabilityReport {
  std::size_t n_pairs = 0;
  /// One entry per non-degenerate member, in member order.
  std::vector<double> quotients;
  double c_empirical = 0.0;
  std::size_t pairs_in_region = 0;
  std::size_t degenerate = 0;
  std::size_t violations = 0;
  double k = 0.0;
  double K = 0.0;
  double final_time = 0.0;
  std::vector<MemberOutcome> members;
  std::vector<std::string> notes;
};

/// Default (k, K) for a family of states.
std::pair<double, double> default_state_thresholds(std::span<const InitialState> family);

/// Evaluates both forward maps for every member and the empirical stability
/// quotient. Throws PreconditionError listing every member outside the
/// uniqueness region or violating the state bounds. Members with zero state
/// and speed discrepancy are skipped and noted.
StabilityReport stability_report(std::span<const EnsembleMember> ensemble,
                                 const BoundaryImpedance& gamma, const SolverConfig& cfg,
                                 const StabilityOptions& opts);

}  // namespace patlab
