#include "patlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patlab/errors.hpp"
#include "patlab/norms.hpp"

namespace patlab {

ScalarField2D::ScalarField2D(Grid2D grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidFieldError("field has " + std::to_string(values_.size()) +
                            " values, grid needs " + std::to_string(grid_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw InvalidFieldError("non-finite field value at node " + std::to_string(k));
    }
  }
}

ScalarField2D ScalarField2D::zeros(const Grid2D& grid) {
  return ScalarField2D(grid, std::vector<double>(grid.size(), 0.0));
}

ScalarField2D ScalarField2D::constant(const Grid2D& grid, double value) {
  return ScalarField2D(grid, std::vector<double>(grid.size(), value));
}

ScalarField2D ScalarField2D::from_function(const Grid2D& grid,
                                           const std::function<double(double, double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      v[grid.index(i, j)] = f(grid.x(i), grid.y(j));
    }
  }
  return ScalarField2D(grid, std::move(v));
}

double ScalarField2D::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField2D::min() const noexcept {
  return *std::min_element(values_.begin(), values_.end());
}

double ScalarField2D::max() const noexcept {
  return *std::max_element(values_.begin(), values_.end());
}

double ScalarField2D::boundary_max_abs() const noexcept {
  double m = 0.0;
  for (std::size_t k : grid_.boundary_nodes()) m = std::max(m, std::abs(values_[k]));
  return m;
}

ScalarField2D ScalarField2D::with_zero_boundary() const {
  std::vector<double> v = values_;
  for (std::size_t k : grid_.boundary_nodes()) v[k] = 0.0;
  return ScalarField2D(grid_, std::move(v));
}

ScalarField2D operator+(const ScalarField2D& a, const ScalarField2D& b) {
  require_same_grid(a.grid_, b.grid_, "field addition");
  std::vector<double> v(a.values_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] + b.values_[k];
  return ScalarField2D(a.grid_, std::move(v));
}

ScalarField2D operator-(const ScalarField2D& a, const ScalarField2D& b) {
  require_same_grid(a.grid_, b.grid_, "field subtraction");
  std::vector<double> v(a.values_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.values_[k] - b.values_[k];
  return ScalarField2D(a.grid_, std::move(v));
}

ScalarField2D operator*(double s, const ScalarField2D& a) {
  std::vector<double> v(a.values_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = s * a.values_[k];
  return ScalarField2D(a.grid_, std::move(v));
}

ScalarField2D map_field(const ScalarField2D& f, const std::function<double(double)>& op) {
  std::vector<double> v(f.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = op(f[k]);
  return ScalarField2D(f.grid(), std::move(v));
}

WaveSpeed::WaveSpeed(ScalarField2D field, double c_low, double c_high)
    : field_(std::move(field)), c_low_(c_low), c_high_(c_high) {
  if (!(c_low > 0.0) || !(c_high >= c_low) || !std::isfinite(c_high)) {
    throw ConfigError("speed bounds must satisfy 0 < c_low <= c_high < inf");
  }
  const double lo = field_.min();
  const double hi = field_.max();
  if (lo < c_low_ || hi > c_high_) {
    throw InvalidFieldError("wave speed range [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] leaves admissible bounds [" +
                            std::to_string(c_low_) + ", " + std::to_string(c_high_) + "]");
  }
}

WaveSpeed WaveSpeed::constant(const Grid2D& grid, double c, double c_low, double c_high) {
  return WaveSpeed(ScalarField2D::constant(grid, c), c_low, c_high);
}

ScalarField2D WaveSpeed::inverse_square() const {
  return map_field(field_, [](double c) { return 1.0 / (c * c); });
}

bool WaveSpeed::within_regularity_bound() const { return norm_w1inf(field_) <= c_high_; }

InitialState::InitialState(ScalarField2D u0, ScalarField2D u1)
    : u0_(std::move(u0)), u1_(std::move(u1)) {
  require_same_grid(u0_.grid(), u1_.grid(), "initial state");
  if (u0_.boundary_max_abs() != 0.0) {
    throw InvalidFieldError("initial pressure must vanish on the boundary");
  }
}

InitialState::InitialState(ScalarField2D u0)
    : InitialState(u0, ScalarField2D::zeros(u0.grid())) {}

}  // namespace patlab
