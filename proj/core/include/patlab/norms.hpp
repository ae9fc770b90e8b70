#pragma once

#include "patlab/field.hpp"

namespace patlab {

/// Trapezoidal L2 inner product over the grid rectangle.
double inner_h0(const ScalarField2D& f, const ScalarField2D& g);

/// L2 norm by trapezoidal quadrature.
double norm_h0(const ScalarField2D& f);

struct Gradient2D {
  ScalarField2D dx;
  ScalarField2D dy;
};

/// Centred differences inside, second-order one-sided differences on the edges.
Gradient2D gradient(const ScalarField2D& f);

/// max(max |f|, max |grad f|).
double norm_w1inf(const ScalarField2D& f);

/// |grad f|^2_{H0} with the gradient() stencil and trapezoidal quadrature.
double gradient_norm_sq(const ScalarField2D& f);

/// Dual norm over discrete H1_0: sqrt(<f, v>) with -Lap_h v = f, v = 0 on the boundary.
double norm_hminus1(const ScalarField2D& f);

}  // namespace patlab
