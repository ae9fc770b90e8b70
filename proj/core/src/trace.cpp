#include "patlab/trace.hpp"

#include <cmath>
#include <string>

#include "patlab/errors.hpp"

namespace patlab {

BoundaryTrace::BoundaryTrace(Grid2D grid, double dt_record, std::size_t n_samples,
                             std::vector<double> samples)
    : grid_(std::move(grid)), dt_record_(dt_record), n_samples_(n_samples),
      samples_(std::move(samples)) {
  if (n_samples_ == 0) throw InvalidTraceError("trace has no samples");
  if (!(dt_record_ > 0.0) || !std::isfinite(dt_record_)) {
    throw InvalidTraceError("trace recording interval must be positive");
  }
  if (samples_.size() != n_samples_ * grid_.boundary_size()) {
    throw InvalidTraceError("trace holds " + std::to_string(samples_.size()) + " values, expected " +
                            std::to_string(n_samples_ * grid_.boundary_size()));
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw InvalidTraceError("non-finite trace sample");
  }
}

BoundaryTrace BoundaryTrace::zeros(const Grid2D& grid, double dt_record, std::size_t n_samples) {
  return BoundaryTrace(grid, dt_record, n_samples,
                       std::vector<double>(n_samples * grid.boundary_size(), 0.0));
}

void require_same_geometry(const BoundaryTrace& a, const BoundaryTrace& b, const char* context) {
  require_same_grid(a.grid(), b.grid(), context);
  if (a.dt_record() != b.dt_record() || a.n_samples() != b.n_samples()) {
    throw GeometryMismatchError(std::string(context) + ": recording times differ");
  }
}

BoundaryTrace operator+(const BoundaryTrace& a, const BoundaryTrace& b) {
  require_same_geometry(a, b, "trace addition");
  std::vector<double> v(a.samples_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.samples_[k] + b.samples_[k];
  return BoundaryTrace(a.grid_, a.dt_record_, a.n_samples_, std::move(v));
}

BoundaryTrace operator-(const BoundaryTrace& a, const BoundaryTrace& b) {
  require_same_geometry(a, b, "trace subtraction");
  std::vector<double> v(a.samples_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.samples_[k] - b.samples_[k];
  return BoundaryTrace(a.grid_, a.dt_record_, a.n_samples_, std::move(v));
}

BoundaryTrace operator*(double s, const BoundaryTrace& a) {
  std::vector<double> v(a.samples_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = s * a.samples_[k];
  return BoundaryTrace(a.grid_, a.dt_record_, a.n_samples_, std::move(v));
}

double trace_inner_h0(const BoundaryTrace& a, const BoundaryTrace& b) {
  require_same_geometry(a, b, "trace_inner_h0");
  if (a.n_samples() < 2) throw InvalidTraceError("trace norm needs at least 2 time samples");
  const auto arc = a.grid().boundary_weights();
  const std::size_t nt = a.n_samples();
  double acc = 0.0;
  for (std::size_t k = 0; k < nt; ++k) {
    const double wt = (k == 0 || k + 1 == nt) ? 0.5 * a.dt_record() : a.dt_record();
    const auto ak = a.at_time(k);
    const auto bk = b.at_time(k);
    double s = 0.0;
    for (std::size_t q = 0; q < ak.size(); ++q) s += arc[q] * ak[q] * bk[q];
    acc += wt * s;
  }
  return acc;
}

double trace_norm_h0(const BoundaryTrace& m) { return std::sqrt(trace_inner_h0(m, m)); }

BoundaryTrace time_derivative(const BoundaryTrace& m) {
  const std::size_t nt = m.n_samples();
  if (nt < 3) throw InvalidTraceError("time derivative needs at least 3 time samples");
  const std::size_t nb = m.n_boundary();
  const double inv = 1.0 / (2.0 * m.dt_record());
  std::vector<double> d(nt * nb);
  for (std::size_t b = 0; b < nb; ++b) {
    d[b] = (-3.0 * m(0, b) + 4.0 * m(1, b) - m(2, b)) * inv;
    for (std::size_t k = 1; k + 1 < nt; ++k) d[k * nb + b] = (m(k + 1, b) - m(k - 1, b)) * inv;
    d[(nt - 1) * nb + b] = (3.0 * m(nt - 1, b) - 4.0 * m(nt - 2, b) + m(nt - 3, b)) * inv;
  }
  return BoundaryTrace(m.grid(), m.dt_record(), nt, std::move(d));
}

double trace_norm_h1h0(const BoundaryTrace& m) {
  const double n0 = trace_norm_h0(m);
  const double n1 = trace_norm_h0(time_derivative(m));
  return std::sqrt(n0 * n0 + n1 * n1);
}

}  // namespace patlab
