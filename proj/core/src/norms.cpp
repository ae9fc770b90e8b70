#include "patlab/norms.hpp"

#include <algorithm>
#include <cmath>

#include "patlab/poisson.hpp"

namespace patlab {

double inner_h0(const ScalarField2D& f, const ScalarField2D& g) {
  require_same_grid(f.grid(), g.grid(), "inner_h0");
  const Grid2D& grid = f.grid();
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    const double wy = grid.weight_y(j);
    double row = 0.0;
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const std::size_t k = grid.index(i, j);
      row += grid.weight_x(i) * f[k] * g[k];
    }
    acc += wy * row;
  }
  return acc;
}

double norm_h0(const ScalarField2D& f) { return std::sqrt(inner_h0(f, f)); }

namespace {

// d/ds of samples v[0..n) with spacing h at position p.
double derivative_1d(const auto& at, std::size_t p, std::size_t n, double h) {
  if (p == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (p + 1 == n) return (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h);
  return (at(p + 1) - at(p - 1)) / (2.0 * h);
}

}  // namespace

Gradient2D gradient(const ScalarField2D& f) {
  const Grid2D& g = f.grid();
  const std::size_t nx = g.nx();
  const std::size_t ny = g.ny();
  std::vector<double> dx(g.size());
  std::vector<double> dy(g.size());
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      dx[g.index(i, j)] =
          derivative_1d([&](std::size_t q) { return f(q, j); }, i, nx, g.hx());
      dy[g.index(i, j)] =
          derivative_1d([&](std::size_t q) { return f(i, q); }, j, ny, g.hy());
    }
  }
  return {ScalarField2D(g, std::move(dx)), ScalarField2D(g, std::move(dy))};
}

double norm_w1inf(const ScalarField2D& f) {
  const Gradient2D grad = gradient(f);
  double m = f.max_abs();
  for (std::size_t k = 0; k < f.size(); ++k) {
    m = std::max(m, std::hypot(grad.dx[k], grad.dy[k]));
  }
  return m;
}

double gradient_norm_sq(const ScalarField2D& f) {
  const Gradient2D grad = gradient(f);
  return inner_h0(grad.dx, grad.dx) + inner_h0(grad.dy, grad.dy);
}

double norm_hminus1(const ScalarField2D& f) {
  const PoissonSolution sol = poisson_dirichlet_solve(f);
  return std::sqrt(std::max(0.0, inner_h0(f, sol.v)));
}

}  // namespace patlab
