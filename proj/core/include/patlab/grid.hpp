#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace patlab {

/// Uniform node-centred grid over the rectangle
/// [origin_x, origin_x + (nx-1) hx] x [origin_y, origin_y + (ny-1) hy].
///
/// Node (i, j) has flat index j * nx + i (row-major, x fastest). The
/// boundary is stored as a counterclockwise loop starting at the origin
/// corner; every perimeter node appears exactly once. Copies share the
/// immutable boundary tables.
class Grid2D {
 public:
  Grid2D(std::size_t nx, std::size_t ny, double hx, double hy, double origin_x = 0.0,
         double origin_y = 0.0);

  /// `cells` intervals per axis on [0,1]^2, i.e. cells + 1 nodes per axis.
  static Grid2D unit_square(std::size_t cells);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return nx_ * ny_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }
  double origin_x() const noexcept { return origin_x_; }
  double origin_y() const noexcept { return origin_y_; }
  double width() const noexcept { return hx_ * static_cast<double>(nx_ - 1); }
  double height() const noexcept { return hy_ * static_cast<double>(ny_ - 1); }
  double diameter() const noexcept;
  double perimeter() const noexcept { return 2.0 * (width() + height()); }

  double x(std::size_t i) const noexcept { return origin_x_ + hx_ * static_cast<double>(i); }
  double y(std::size_t j) const noexcept { return origin_y_ + hy_ * static_cast<double>(j); }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }
  bool on_boundary(std::size_t i, std::size_t j) const noexcept {
    return i == 0 || j == 0 || i + 1 == nx_ || j + 1 == ny_;
  }

  /// 1-D trapezoidal weights along each axis.
  double weight_x(std::size_t i) const noexcept {
    return (i == 0 || i + 1 == nx_) ? 0.5 * hx_ : hx_;
  }
  double weight_y(std::size_t j) const noexcept {
    return (j == 0 || j + 1 == ny_) ? 0.5 * hy_ : hy_;
  }
  /// Tensor trapezoidal area weight of node (i, j).
  double area_weight(std::size_t i, std::size_t j) const noexcept {
    return weight_x(i) * weight_y(j);
  }

  std::size_t boundary_size() const noexcept { return tables_->nodes.size(); }
  /// Flat node indices of the perimeter, counterclockwise from the origin.
  std::span<const std::size_t> boundary_nodes() const noexcept { return tables_->nodes; }
  /// Trapezoidal arc-length weights of the closed perimeter; they sum to perimeter().
  std::span<const double> boundary_weights() const noexcept { return tables_->weights; }
  /// Arc-length coordinate of each boundary node measured from the origin.
  std::span<const double> boundary_arc_length() const noexcept { return tables_->arc; }

  friend bool operator==(const Grid2D& a, const Grid2D& b) noexcept {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.hx_ == b.hx_ && a.hy_ == b.hy_ &&
           a.origin_x_ == b.origin_x_ && a.origin_y_ == b.origin_y_;
  }

 private:
  struct BoundaryTables {
    std::vector<std::size_t> nodes;
    std::vector<double> weights;
    std::vector<double> arc;
  };

  std::size_t nx_;
  std::size_t ny_;
  double hx_;
  double hy_;
  double origin_x_;
  double origin_y_;
  std::shared_ptr<const BoundaryTables> tables_;
};

/// Throws GeometryMismatchError unless both grids are identical.
void require_same_grid(const Grid2D& a, const Grid2D& b, const char* context);

}  // namespace patlab
