#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "patlab/grid.hpp"

namespace patlab {

/// Real-valued samples of a function on a Grid2D. Values are always finite.
class ScalarField2D {
 public:
  /// Throws InvalidFieldError on size mismatch or non-finite samples.
  ScalarField2D(Grid2D grid, std::vector<double> values);

  static ScalarField2D zeros(const Grid2D& grid);
  static ScalarField2D constant(const Grid2D& grid, double value);
  static ScalarField2D from_function(const Grid2D& grid,
                                     const std::function<double(double, double)>& f);

  const Grid2D& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return values_[grid_.index(i, j)];
  }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  double max_abs() const noexcept;
  double min() const noexcept;
  double max() const noexcept;
  /// Largest |value| over the boundary nodes.
  double boundary_max_abs() const noexcept;

  ScalarField2D with_zero_boundary() const;

  friend ScalarField2D operator+(const ScalarField2D& a, const ScalarField2D& b);
  friend ScalarField2D operator-(const ScalarField2D& a, const ScalarField2D& b);
  friend ScalarField2D operator*(double s, const ScalarField2D& a);
  friend bool operator==(const ScalarField2D& a, const ScalarField2D& b) {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

/// Pointwise map of a field; the result is validated.
ScalarField2D map_field(const ScalarField2D& f, const std::function<double(double)>& op);

/// Acoustic wave speed with admissible pointwise bounds c_low <= c <= c_high.
///
/// The bound c_high doubles as the surrogate for the W^{1,inf} bound of the
/// speed; that regularity check is reported by within_regularity_bound()
/// rather than enforced, since piecewise-bilinear iterates may exceed it.
class WaveSpeed {
 public:
  WaveSpeed(ScalarField2D field, double c_low, double c_high);

  static WaveSpeed constant(const Grid2D& grid, double c, double c_low, double c_high);

  const ScalarField2D& field() const noexcept { return field_; }
  const Grid2D& grid() const noexcept { return field_.grid(); }
  double c_low() const noexcept { return c_low_; }
  double c_high() const noexcept { return c_high_; }
  double max() const noexcept { return field_.max(); }
  double min() const noexcept { return field_.min(); }

  /// c^{-2} sampled pointwise.
  ScalarField2D inverse_square() const;
  bool within_regularity_bound() const;

 private:
  ScalarField2D field_;
  double c_low_;
  double c_high_;
};

/// Initial pressure u0 and pressure rate u1. u0 vanishes on every boundary node.
class InitialState {
 public:
  InitialState(ScalarField2D u0, ScalarField2D u1);
  /// u1 = 0, the usual photoacoustic setting.
  explicit InitialState(ScalarField2D u0);

  const ScalarField2D& u0() const noexcept { return u0_; }
  const ScalarField2D& u1() const noexcept { return u1_; }
  const Grid2D& grid() const noexcept { return u0_.grid(); }

 private:
  ScalarField2D u0_;
  ScalarField2D u1_;
};

/// The two quadratic quantities bounding admissible states, with thresholds.
struct StateBounds {
  double energy_upper = 0.0;  ///< |grad u0|^2 + |u1|^2 (H0 norms)
  double mass_lower = 0.0;    ///< |u0|^2_{H0} + |u1|^2_{H^-1}
  double k = 0.0;
  double K = 0.0;
  bool mass_ok = false;    ///< k <= mass_lower
  bool energy_ok = false;  ///< energy_upper <= K
  bool satisfied() const noexcept { return mass_ok && energy_ok; }
};

}  // namespace patlab
