#include "patlab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "patlab/errors.hpp"
#include "patlab/norms.hpp"
#include "patlab/parallel.hpp"

namespace patlab {

double speed_discrepancy_ratio(const WaveSpeed& c, const WaveSpeed& c_tilde) {
  require_same_grid(c.grid(), c_tilde.grid(), "speed_discrepancy_ratio");
  const ScalarField2D q = c.inverse_square();
  const ScalarField2D q_tilde = c_tilde.inverse_square();
  const double num = norm_w1inf(q - q_tilde);
  const double den = norm_w1inf(q);
  return (num * num) / (den * den);
}

double state_mass(const InitialState& s) {
  const double a = norm_h0(s.u0());
  const double b = norm_hminus1(s.u1());
  return a * a + b * b;
}

double state_energy(const InitialState& s) {
  const double b = norm_h0(s.u1());
  return gradient_norm_sq(s.u0()) + b * b;
}

double state_discrepancy_ratio(const InitialState& s, const InitialState& s_tilde) {
  require_same_grid(s.grid(), s_tilde.grid(), "state_discrepancy_ratio");
  const double den = state_mass(s);
  if (!(den > 0.0)) {
    throw DegenerateError("reference state has zero mass; the state ratio is undefined");
  }
  const double a = norm_h0(s.u0() - s_tilde.u0());
  const double b = norm_hminus1(s.u1() - s_tilde.u1());
  return (a * a + b * b) / den;
}

double measurement_discrepancy_ratio(const BoundaryTrace& trace, const BoundaryTrace& trace_tilde,
                                     const BoundaryTrace& ref) {
  require_same_geometry(trace, trace_tilde, "measurement_discrepancy_ratio");
  require_same_geometry(trace, ref, "measurement_discrepancy_ratio");
  const double den = trace_norm_h0(ref);
  if (!(den > 0.0)) {
    throw DegenerateError("reference trace vanishes; the measurement ratio is undefined");
  }
  const double num = trace_norm_h1h0(trace - trace_tilde);
  return (num * num) / (den * den);
}

bool region_verdict(double speed_ratio_sq, double state_ratio_sq, double epsilon) noexcept {
  return speed_ratio_sq <= epsilon * state_ratio_sq;
}

DiscrepancyReport check_uniqueness_region(const WaveSpeed& c, const WaveSpeed& c_tilde,
                                          const InitialState& s, const InitialState& s_tilde,
                                          double epsilon) {
  DiscrepancyReport r;
  r.epsilon = epsilon;
  r.speed_ratio_sq = speed_discrepancy_ratio(c, c_tilde);
  r.state_ratio_sq = state_discrepancy_ratio(s, s_tilde);
  r.in_region = region_verdict(r.speed_ratio_sq, r.state_ratio_sq, epsilon);
  return r;
}

StateBounds check_assumption_bounds(const InitialState& s, double k, double K) {
  StateBounds b;
  b.energy_upper = state_energy(s);
  b.mass_lower = state_mass(s);
  b.k = k;
  b.K = K;
  b.mass_ok = k <= b.mass_lower;
  b.energy_ok = b.energy_upper <= K;
  return b;
}

std::pair<double, double> default_state_thresholds(std::span<const InitialState> family) {
  double mass_min = std::numeric_limits<double>::infinity();
  double energy_max = 0.0;
  for (const auto& s : family) {
    mass_min = std::min(mass_min, state_mass(s));
    energy_max = std::max(energy_max, state_energy(s));
  }
  return {0.5 * mass_min, 2.0 * energy_max};
}

StabilityReport stability_report(std::span<const EnsembleMember> ensemble,
                                 const BoundaryImpedance& gamma, const SolverConfig& cfg,
                                 const StabilityOptions& opts) {
  StabilityReport rep;
  rep.n_pairs = ensemble.size();
  rep.final_time = cfg.final_time;
  rep.members.resize(ensemble.size());

  rep.k = opts.k;
  rep.K = opts.K;
  if (!(opts.k > 0.0) || !(opts.K > 0.0)) {
    std::vector<InitialState> family;
    family.reserve(2 * ensemble.size());
    for (const auto& m : ensemble) {
      family.push_back(m.s);
      family.push_back(m.s_tilde);
    }
    const auto [k, K] = default_state_thresholds(family);
    if (!(opts.k > 0.0)) rep.k = k;
    if (!(opts.K > 0.0)) rep.K = K;
  }

  std::ostringstream offenders;
  std::size_t n_offenders = 0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& m = ensemble[i];
    auto& out = rep.members[i];
    out.index = i;
    out.report = check_uniqueness_region(m.c, m.c_tilde, m.s, m.s_tilde, opts.epsilon);
    if (out.report.state_ratio_sq == 0.0 && out.report.speed_ratio_sq == 0.0) {
      out.degenerate = true;
      ++rep.degenerate;
      rep.notes.push_back("member " + std::to_string(i) +
                          ": identical pair, skipped as degenerate");
      continue;
    }
    if (!out.report.in_region) {
      offenders << " member " << i << " (speed_ratio_sq " << out.report.speed_ratio_sq
                << " > epsilon * state_ratio_sq " << opts.epsilon * out.report.state_ratio_sq
                << ");";
      ++n_offenders;
      continue;
    }
    for (const InitialState* st : {&m.s, &m.s_tilde}) {
      const StateBounds b = check_assumption_bounds(*st, rep.k, rep.K);
      if (!b.satisfied()) {
        offenders << " member " << i << " (state bounds violated: mass " << b.mass_lower
                  << " vs k " << rep.k << ", energy " << b.energy_upper << " vs K " << rep.K
                  << ");";
        ++n_offenders;
        break;
      }
    }
  }
  if (n_offenders > 0) {
    throw PreconditionError(std::to_string(n_offenders) +
                            " ensemble member(s) outside the admissible region:" + offenders.str());
  }

  parallel_for(ensemble.size(), opts.workers, [&](std::size_t i) {
    auto& out = rep.members[i];
    if (out.degenerate) return;
    const auto& m = ensemble[i];
    SolverConfig run = cfg;
    run.reference_speed = std::max({cfg.reference_speed, m.c.max(), m.c_tilde.max()});
    const BoundaryTrace trace = forward_map(m.c, gamma, m.s, run);
    const BoundaryTrace trace_tilde = forward_map(m.c_tilde, gamma, m.s_tilde, run);
    out.report.meas_ratio_sq = measurement_discrepancy_ratio(trace, trace_tilde, trace);
    out.report.empirical_quotient =
        out.report.meas_ratio_sq > 0.0
            ? out.report.state_ratio_sq * cfg.final_time / out.report.meas_ratio_sq
            : std::numeric_limits<double>::infinity();
    out.violation = out.report.state_ratio_sq > opts.state_threshold &&
                    out.report.meas_ratio_sq < opts.meas_threshold;
  });

  for (const auto& out : rep.members) {
    if (out.degenerate) continue;
    if (out.report.in_region) ++rep.pairs_in_region;
    rep.quotients.push_back(out.report.empirical_quotient);
    rep.c_empirical = std::max(rep.c_empirical, out.report.empirical_quotient);
    if (out.violation) {
      ++rep.violations;
      rep.notes.push_back("member " + std::to_string(out.index) +
                          ": uniqueness violation (state differs, measurements agree)");
    }
  }
  return rep;
}

}  // namespace patlab
