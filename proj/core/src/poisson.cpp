#include "patlab/poisson.hpp"

#include <cmath>
#include <vector>

#include "patlab/errors.hpp"

namespace patlab {

namespace {

// y = -Lap_h x at interior nodes; boundary entries of x are zero and of y are left at zero.
void apply_negative_laplacian(const Grid2D& g, const std::vector<double>& x,
                              std::vector<double>& y) {
  const std::size_t nx = g.nx();
  const double ax = 1.0 / (g.hx() * g.hx());
  const double ay = 1.0 / (g.hy() * g.hy());
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      y[k] = ax * (2.0 * x[k] - x[k - 1] - x[k + 1]) + ay * (2.0 * x[k] - x[k - nx] - x[k + nx]);
    }
  }
}

double dot_interior(const Grid2D& g, const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  const std::size_t nx = g.nx();
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      acc += a[k] * b[k];
    }
  }
  return acc;
}

}  // namespace

PoissonSolution poisson_dirichlet_solve(const ScalarField2D& f, const PoissonOptions& opts) {
  const Grid2D& g = f.grid();
  const std::size_t n = g.size();
  const std::size_t unknowns = (g.nx() - 2) * (g.ny() - 2);
  const std::size_t cap = opts.max_iterations == 0 ? 10 * unknowns : opts.max_iterations;

  std::vector<double> x(n, 0.0);
  std::vector<double> r(n, 0.0);
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) r[g.index(i, j)] = f(i, j);
  }
  const double rhs_norm = std::sqrt(dot_interior(g, r, r));
  if (rhs_norm == 0.0) {
    return {ScalarField2D(g, std::move(x)), 0, 0.0};
  }

  std::vector<double> p = r;
  std::vector<double> ap(n, 0.0);
  double rr = dot_interior(g, r, r);
  const double target = opts.relative_tolerance * rhs_norm;
  std::size_t it = 0;
  while (std::sqrt(rr) > target) {
    if (it == cap) {
      throw SolverFailureError("Dirichlet Poisson solve did not converge", std::sqrt(rr) / rhs_norm);
    }
    apply_negative_laplacian(g, p, ap);
    const double alpha = rr / dot_interior(g, p, ap);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    const double rr_next = dot_interior(g, r, r);
    const double beta = rr_next / rr;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
    rr = rr_next;
    ++it;
  }

  // recurrence residual can drift from the true residual; report the true one
  apply_negative_laplacian(g, x, ap);
  double res = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const double d = f[k] - ap[k];
      res += d * d;
    }
  }
  for (std::size_t k : g.boundary_nodes()) x[k] = 0.0;
  return {ScalarField2D(g, std::move(x)), it, std::sqrt(res) / rhs_norm};
}

}  // namespace patlab
