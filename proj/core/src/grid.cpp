#include "patlab/grid.hpp"

#include <cmath>
#include <string>

#include "patlab/errors.hpp"

namespace patlab {

Grid2D::Grid2D(std::size_t nx, std::size_t ny, double hx, double hy, double origin_x,
               double origin_y)
    : nx_(nx), ny_(ny), hx_(hx), hy_(hy), origin_x_(origin_x), origin_y_(origin_y) {
  if (nx < 8 || ny < 8) {
    throw ConfigError("grid needs at least 8 nodes per axis, got " + std::to_string(nx) + "x" +
                      std::to_string(ny));
  }
  if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy)) {
    throw ConfigError("grid spacings must be positive and finite");
  }
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) {
    throw ConfigError("grid origin must be finite");
  }

  auto tables = std::make_shared<BoundaryTables>();
  auto& nodes = tables->nodes;
  auto& steps = tables->weights;  // reused below as segment lengths to the next node
  nodes.reserve(2 * (nx + ny) - 4);
  steps.reserve(2 * (nx + ny) - 4);
  // bottom edge, left to right
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    nodes.push_back(index(i, 0));
    steps.push_back(hx);
  }
  // right edge, bottom to top
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    nodes.push_back(index(nx - 1, j));
    steps.push_back(hy);
  }
  // top edge, right to left
  for (std::size_t i = nx - 1; i > 0; --i) {
    nodes.push_back(index(i, ny - 1));
    steps.push_back(hx);
  }
  // left edge, top to bottom
  for (std::size_t j = ny - 1; j > 0; --j) {
    nodes.push_back(index(0, j));
    steps.push_back(hy);
  }

  const std::size_t nb = nodes.size();
  std::vector<double> weights(nb);
  tables->arc.resize(nb);
  double s = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const double before = steps[(b + nb - 1) % nb];
    weights[b] = 0.5 * (before + steps[b]);
    tables->arc[b] = s;
    s += steps[b];
  }
  tables->weights = std::move(weights);
  tables_ = std::move(tables);
}

Grid2D Grid2D::unit_square(std::size_t cells) {
  const double h = 1.0 / static_cast<double>(cells);
  return Grid2D(cells + 1, cells + 1, h, h);
}

double Grid2D::diameter() const noexcept { return std::hypot(width(), height()); }

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* context) {
  if (!(a == b)) {
    throw GeometryMismatchError(std::string(context) + ": grids differ");
  }
}

}  // namespace patlab
