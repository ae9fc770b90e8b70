#pragma once

#include <cstddef>

#include "patlab/field.hpp"

namespace patlab {

struct PoissonOptions {
  double relative_tolerance = 1e-10;
  std::size_t max_iterations = 0;  ///< 0 selects 10 * number of unknowns
};

struct PoissonSolution {
  ScalarField2D v;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Solves -Lap_h v = f (5-point stencil) at interior nodes with v = 0 on the
/// boundary, by conjugate gradients. Boundary values of f are ignored.
/// Throws SolverFailureError when the iteration cap is reached.
PoissonSolution poisson_dirichlet_solve(const ScalarField2D& f, const PoissonOptions& opts = {});

}  // namespace patlab
