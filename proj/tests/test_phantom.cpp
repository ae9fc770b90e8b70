#include <gtest/gtest.h>

#include <cmath>

#include "patlab/errors.hpp"
#include "patlab/verifier.hpp"
#include "support.hpp"

using namespace patlab;
using namespace testing_support;

namespace {

WaveSpeed unit_speed(const Grid2D& g) { return WaveSpeed::constant(g, 1.0, 0.8, 1.2); }

PhantomSpec three_disks() {
  PhantomSpec spec;
  spec.kind = PhantomKind::disks;
  spec.features = {{0.35, 0.4, 0.15, 1.0}, {0.65, 0.6, 0.2, 0.6}, {0.6, 0.25, 0.08, -0.4}};
  return spec;
}

}  // namespace

TEST(PhantomKind, ParsesNamesAndRejectsUnknown) {
  EXPECT_EQ(parse_phantom_kind("disks"), PhantomKind::disks);
  EXPECT_EQ(parse_phantom_kind("gaussians"), PhantomKind::gaussians);
  EXPECT_EQ(parse_phantom_kind("shepp-like"), PhantomKind::shepp_like);
  EXPECT_EQ(to_string(PhantomKind::shepp_like), "shepp-like");
  EXPECT_THROW(parse_phantom_kind("cubes"), ConfigError);
}

TEST(PressurePhantom, EmptyFeatureListGivesDegenerateZeroState) {
  const Grid2D g = Grid2D::unit_square(32);
  PhantomSpec spec;
  const InitialState s = make_pressure_phantom(spec, g);
  EXPECT_EQ(s.u0().max_abs(), 0.0);
  EXPECT_EQ(state_mass(s), 0.0);
  EXPECT_FALSE(check_assumption_bounds(s, 1e-12, 1.0).mass_ok);
  EXPECT_THROW(perturb_pair(unit_speed(g), s, 0.0, 1e-2, 1), DegenerateError);
}

TEST(PressurePhantom, CentredBumpVanishesOnBoundary) {
  const Grid2D g = Grid2D::unit_square(64);
  PhantomSpec spec;
  spec.kind = PhantomKind::gaussians;
  spec.features = {{0.5, 0.5, 0.3, 1.0}};
  const InitialState s = make_pressure_phantom(spec, g);
  EXPECT_EQ(s.u0().boundary_max_abs(), 0.0);
  EXPECT_GT(state_mass(s), 0.0);
  EXPECT_NEAR(s.u0().max(), 1.0, 1e-12);
  EXPECT_EQ(s.u1().max_abs(), 0.0);
}

TEST(PressurePhantom, ThreeDiskBoundsMatchQuadratureOracle) {
  const Grid2D g = Grid2D::unit_square(64);
  const PhantomSpec spec = three_disks();
  const InitialState s = make_pressure_phantom(spec, g);

  // Independent evaluation of the tapered-disk profile and its quadratures.
  const double edge = spec.edge_fraction;
  auto profile = [&](double x, double y) {
    double v = 0.0;
    for (const auto& f : spec.features) {
      const double rho = std::hypot(x - f.x, y - f.y) / f.radius;
      double p = 0.0;
      if (rho <= 1.0 - edge) {
        p = 1.0;
      } else if (rho < 1.0) {
        p = 0.5 * (1.0 + std::cos(kPi * (rho - (1.0 - edge)) / edge));
      }
      v += f.amplitude * p;
    }
    return v;
  };
  const std::size_t n = g.nx();
  const double h = g.hx();
  std::vector<double> u(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool edge_node = i == 0 || j == 0 || i == n - 1 || j == n - 1;
      u[j * n + i] = edge_node ? 0.0 : profile(h * static_cast<double>(i), h * static_cast<double>(j));
    }
  }
  auto at = [&](std::size_t i, std::size_t j) { return u[j * n + i]; };
  auto w = [&](std::size_t i) { return (i == 0 || i == n - 1) ? 0.5 * h : h; };
  auto diff = [&](std::size_t p, auto f) {
    if (p == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
    if (p == n - 1) return (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
    return (f(p + 1) - f(p - 1)) / (2.0 * h);
  };
  double mass = 0.0;
  double grad = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double gx = diff(i, [&](std::size_t q) { return at(q, j); });
      const double gy = diff(j, [&](std::size_t q) { return at(i, q); });
      mass += w(i) * w(j) * at(i, j) * at(i, j);
      grad += w(i) * w(j) * (gx * gx + gy * gy);
    }
  }
  const StateBounds b = check_assumption_bounds(s, 0.0, 0.0);
  EXPECT_NEAR(b.mass_lower, mass, 1e-10 * mass);
  EXPECT_NEAR(b.energy_upper, grad, 1e-10 * grad);
}

TEST(PressurePhantom, FeatureInsideMarginIsRejected) {
  const Grid2D g = Grid2D::unit_square(32);
  PhantomSpec spec;
  spec.features = {{0.1, 0.5, 0.08, 1.0}};
  spec.support_margin = 0.05;
  EXPECT_THROW(make_pressure_phantom(spec, g), ConfigError);
  spec.support_margin = 0.0;
  EXPECT_THROW(make_pressure_phantom(spec, g), ConfigError);
}

TEST(PressurePhantom, ShepplikeFeaturesFitInsideMargin) {
  const Grid2D g = Grid2D::unit_square(64);
  PhantomSpec spec;
  spec.kind = PhantomKind::shepp_like;
  spec.features = shepp_like_features(g, spec.support_margin);
  const InitialState s = make_pressure_phantom(spec, g);
  EXPECT_GT(state_mass(s), 0.0);
  EXPECT_EQ(s.u0().boundary_max_abs(), 0.0);
}

TEST(PressurePhantom, GenerationIsDeterministic) {
  const Grid2D g = Grid2D::unit_square(48);
  EXPECT_EQ(make_pressure_phantom(three_disks(), g).u0(), make_pressure_phantom(three_disks(), g).u0());
}

TEST(SpeedPhantom, ZeroVariationIsConstant) {
  const Grid2D g = Grid2D::unit_square(32);
  SpeedPhantomOptions opts;
  opts.c_base = 1.5;
  const WaveSpeed c = make_speed_phantom(three_disks(), g, opts);
  EXPECT_EQ(c.min(), 1.5);
  EXPECT_EQ(c.max(), 1.5);
}

TEST(SpeedPhantom, TenPercentVariationStaysInBand) {
  const Grid2D g = Grid2D::unit_square(64);
  SpeedPhantomOptions opts;
  opts.variation = 0.10;
  PhantomSpec spec;
  spec.kind = PhantomKind::gaussians;
  spec.features = {{0.4, 0.5, 0.1, 1.0}, {0.6, 0.5, 0.1, 1.0}, {0.5, 0.7, 0.15, -0.7}};
  const WaveSpeed c = make_speed_phantom(spec, g, opts);
  EXPECT_GE(c.min(), 0.9);
  EXPECT_LE(c.max(), 1.1);
  EXPECT_GT(c.max() - c.min(), 0.05);
}

TEST(SpeedPhantom, BumpW1InfMatchesAnalyticGradient) {
  const Grid2D g = Grid2D::unit_square(64);
  const double sigma = 0.15;
  const double amp = 0.1;
  SpeedPhantomOptions opts;
  opts.variation = amp;
  PhantomSpec spec;
  spec.kind = PhantomKind::gaussians;
  spec.features = {{0.5, 0.5, sigma, 1.0}};
  const WaveSpeed c = make_speed_phantom(spec, g, opts);
  const ScalarField2D bump = c.field() - ScalarField2D::constant(g, 1.0);
  // max |d/dr amp exp(-r^2 / 2 sigma^2)| = amp exp(-1/2) / sigma, above amp itself.
  const double analytic = amp * std::exp(-0.5) / sigma;
  EXPECT_NEAR(norm_w1inf(bump), analytic, 0.05 * analytic);
}

TEST(SpeedPhantom, RejectsExcessVariation) {
  const Grid2D g = Grid2D::unit_square(16);
  SpeedPhantomOptions opts;
  opts.variation = 0.2;
  EXPECT_THROW(make_speed_phantom(three_disks(), g, opts), ConfigError);
  opts.max_variation = 2.0;
  opts.variation = 1.0;
  EXPECT_THROW(make_speed_phantom(three_disks(), g, opts), ConfigError);
}

TEST(PerturbationShapes, StateShapeVanishesOnBoundaryAndIsSeeded) {
  const Grid2D g = Grid2D::unit_square(40);
  const PerturbationShapes a = make_perturbation_shapes(g, 3);
  const PerturbationShapes b = make_perturbation_shapes(g, 3);
  const PerturbationShapes other = make_perturbation_shapes(g, 4);
  EXPECT_EQ(a.state.boundary_max_abs(), 0.0);
  EXPECT_NEAR(a.state.max_abs(), 1.0, 1e-15);
  EXPECT_NEAR(a.speed.max_abs(), 1.0, 1e-15);
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(a.speed, b.speed);
  EXPECT_NE(a.state, other.state);
}

TEST(PerturbPair, ZeroTargetsReturnTheInputs) {
  const Grid2D g = Grid2D::unit_square(32);
  const WaveSpeed c = unit_speed(g);
  const InitialState s = make_pressure_phantom(three_disks(), g);
  const PerturbedPair p = perturb_pair(c, s, 0.0, 0.0, 1);
  EXPECT_EQ(p.c_tilde.field(), c.field());
  EXPECT_EQ(p.s_tilde.u0(), s.u0());
  EXPECT_EQ(p.s_tilde.u1(), s.u1());
}

TEST(PerturbPair, HitsTargetsInsideRegion) {
  const Grid2D g = Grid2D::unit_square(64);
  const WaveSpeed c = unit_speed(g);
  const InitialState s = make_pressure_phantom(three_disks(), g);
  const PerturbedPair p = perturb_pair(c, s, 1e-6, 1e-2, 7);
  const double sr = speed_discrepancy_ratio(c, p.c_tilde);
  const double ur = state_discrepancy_ratio(s, p.s_tilde);
  EXPECT_NEAR(sr, 1e-6, 0.01 * 1e-6);
  EXPECT_NEAR(ur, 1e-2, 0.01 * 1e-2);
  EXPECT_EQ(p.speed_ratio_sq, sr);
  EXPECT_EQ(p.state_ratio_sq, ur);
  EXPECT_TRUE(check_uniqueness_region(c, p.c_tilde, s, p.s_tilde, 1e-2).in_region);
  EXPECT_EQ(p.s_tilde.u0().boundary_max_abs(), 0.0);
}

TEST(PerturbPair, SwappedTargetsLeaveRegion) {
  const Grid2D g = Grid2D::unit_square(64);
  const WaveSpeed c = unit_speed(g);
  const InitialState s = make_pressure_phantom(three_disks(), g);
  const PerturbedPair p = perturb_pair(c, s, 1e-2, 1e-6, 7);
  EXPECT_FALSE(check_uniqueness_region(c, p.c_tilde, s, p.s_tilde, 1e-2).in_region);
}

TEST(PerturbPair, ClampedTargetIsBisected) {
  const Grid2D g = Grid2D::unit_square(32);
  const WaveSpeed c = WaveSpeed::constant(g, 1.0, 0.95, 1.05);
  const InitialState s = make_pressure_phantom(three_disks(), g);
  // Large enough that the unclamped amplitude leaves [0.95, 1.05] somewhere.
  const PerturbedPair p = perturb_pair(c, s, 0.02, 0.0, 2);
  EXPECT_NEAR(speed_discrepancy_ratio(c, p.c_tilde), 0.02, 0.01 * 0.02);
  EXPECT_GE(p.c_tilde.min(), 0.95);
  EXPECT_LE(p.c_tilde.max(), 1.05);
}

TEST(PerturbPair, UnreachableTargetReportsAchievableMaximum) {
  const Grid2D g = Grid2D::unit_square(32);
  const WaveSpeed c = WaveSpeed::constant(g, 1.0, 0.95, 1.05);
  const InitialState s = make_pressure_phantom(three_disks(), g);
  try {
    perturb_pair(c, s, 50.0, 1e-2, 3);
    FAIL() << "expected saturation";
  } catch (const SaturationError& e) {
    EXPECT_GT(e.achievable(), 0.0);
    EXPECT_LT(e.achievable(), 50.0);
  }
}

TEST(PerturbPair, DeterministicPerSeed) {
  const Grid2D g = Grid2D::unit_square(32);
  const WaveSpeed c = unit_speed(g);
  const InitialState s = make_pressure_phantom(three_disks(), g);
  const PerturbedPair a = perturb_pair(c, s, 1e-5, 1e-2, 11);
  const PerturbedPair b = perturb_pair(c, s, 1e-5, 1e-2, 11);
  const PerturbedPair other = perturb_pair(c, s, 1e-5, 1e-2, 12);
  EXPECT_EQ(a.c_tilde.field(), b.c_tilde.field());
  EXPECT_EQ(a.s_tilde.u0(), b.s_tilde.u0());
  EXPECT_NE(a.s_tilde.u0(), other.s_tilde.u0());
}

TEST(PerturbPair, RatiosScaleQuadraticallyWithAmplitude) {
  const Grid2D g = Grid2D::unit_square(32);
  const WaveSpeed c = unit_speed(g);
  const InitialState s = make_pressure_phantom(three_disks(), g);
  const PerturbationShapes shapes = make_perturbation_shapes(g, 5);
  const PerturbedPair base = apply_perturbation(c, s, shapes, 1e-3, 0.05);
  for (double a : {0.5, 3.0}) {
    const PerturbedPair scaled = apply_perturbation(c, s, shapes, a * 1e-3, a * 0.05);
    EXPECT_NEAR(scaled.state_ratio_sq, a * a * base.state_ratio_sq, 1e-12 * scaled.state_ratio_sq);
    EXPECT_NEAR(scaled.speed_ratio_sq, a * a * base.speed_ratio_sq, 1e-9 * scaled.speed_ratio_sq);
  }
}
