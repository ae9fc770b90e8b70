#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "patlab/grid.hpp"

namespace patlab {

/// Time series of values at every boundary node of a grid, time-major:
/// sample k of boundary node b sits at k * boundary_size() + b and
/// corresponds to time k * dt_record.
class BoundaryTrace {
 public:
  BoundaryTrace(Grid2D grid, double dt_record, std::size_t n_samples, std::vector<double> samples);

  static BoundaryTrace zeros(const Grid2D& grid, double dt_record, std::size_t n_samples);

  const Grid2D& grid() const noexcept { return grid_; }
  double dt_record() const noexcept { return dt_record_; }
  std::size_t n_samples() const noexcept { return n_samples_; }
  std::size_t n_boundary() const noexcept { return grid_.boundary_size(); }
  /// Time of the last sample.
  double duration() const noexcept { return dt_record_ * static_cast<double>(n_samples_ - 1); }
  std::span<const double> samples() const noexcept { return samples_; }
  std::span<const double> at_time(std::size_t k) const noexcept {
    return std::span<const double>(samples_).subspan(k * n_boundary(), n_boundary());
  }
  double operator()(std::size_t k, std::size_t b) const noexcept {
    return samples_[k * n_boundary() + b];
  }

  friend BoundaryTrace operator+(const BoundaryTrace& a, const BoundaryTrace& b);
  friend BoundaryTrace operator-(const BoundaryTrace& a, const BoundaryTrace& b);
  friend BoundaryTrace operator*(double s, const BoundaryTrace& a);
  friend bool operator==(const BoundaryTrace& a, const BoundaryTrace& b) {
    return a.grid_ == b.grid_ && a.dt_record_ == b.dt_record_ && a.samples_ == b.samples_;
  }

 private:
  Grid2D grid_;
  double dt_record_;
  std::size_t n_samples_;
  std::vector<double> samples_;
};

/// Throws GeometryMismatchError unless grid, dt and sample count agree.
void require_same_geometry(const BoundaryTrace& a, const BoundaryTrace& b, const char* context);

/// Time trapezoid weights times boundary arc-length weights.
double trace_inner_h0(const BoundaryTrace& a, const BoundaryTrace& b);

/// L2 norm over (0,T) x boundary.
double trace_norm_h0(const BoundaryTrace& m);

/// Time derivative by centred differences, second-order one-sided at the ends.
BoundaryTrace time_derivative(const BoundaryTrace& m);

/// sqrt(|m|^2 + |dm/dt|^2) over (0,T) x boundary.
double trace_norm_h1h0(const BoundaryTrace& m);

}  // namespace patlab
