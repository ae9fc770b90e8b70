#include "patlab/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "patlab/errors.hpp"
#include "patlab/norms.hpp"
#include "patlab/verifier.hpp"

namespace patlab {

PhantomKind parse_phantom_kind(const std::string& name) {
  if (name == "disks") return PhantomKind::disks;
  if (name == "gaussians") return PhantomKind::gaussians;
  if (name == "shepp-like" || name == "shepp_like") return PhantomKind::shepp_like;
  throw ConfigError("unknown phantom kind '" + name + "' (disks | gaussians | shepp-like)");
}

std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::disks:
      return "disks";
    case PhantomKind::gaussians:
      return "gaussians";
    case PhantomKind::shepp_like:
      return "shepp-like";
  }
  return "disks";
}

namespace {

double semi_axis_y(const PhantomFeature& f) { return f.radius_y > 0.0 ? f.radius_y : f.radius; }

// Elliptical radius of (x, y) in units of the feature's semi-axes.
double scaled_radius(const PhantomFeature& f, double x, double y) {
  const double dx = x - f.x;
  const double dy = y - f.y;
  const double ca = std::cos(f.angle);
  const double sa = std::sin(f.angle);
  const double u = (dx * ca + dy * sa) / f.radius;
  const double v = (-dx * sa + dy * ca) / semi_axis_y(f);
  return std::sqrt(u * u + v * v);
}

double tapered_plateau(double rho, double edge) {
  if (rho >= 1.0) return 0.0;
  const double start = 1.0 - edge;
  if (rho <= start) return 1.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (rho - start) / edge));
}

// Compactly supported Gaussian-like bump, C1 at rho = 1.
double compact_bump(double rho) {
  if (rho >= 1.0) return 0.0;
  const double w = 1.0 - rho * rho;
  return std::exp(-4.5 * rho * rho) * w * w;
}

double pressure_profile(const PhantomSpec& spec, const PhantomFeature& f, double x, double y) {
  const double rho = scaled_radius(f, x, y);
  switch (spec.kind) {
    case PhantomKind::gaussians:
      return compact_bump(rho);
    case PhantomKind::disks:
    case PhantomKind::shepp_like:
      return tapered_plateau(rho, spec.edge_fraction);
  }
  return 0.0;
}

void validate_spec(const PhantomSpec& spec) {
  if (!(spec.support_margin > 0.0)) throw ConfigError("support_margin must be positive");
  if (!(spec.edge_fraction > 0.0) || spec.edge_fraction > 1.0) {
    throw ConfigError("edge_fraction must lie in (0, 1]");
  }
  for (const auto& f : spec.features) {
    if (!std::isfinite(f.amplitude) || !std::isfinite(f.x) || !std::isfinite(f.y)) {
      throw ConfigError("phantom feature values must be finite");
    }
    if (!(f.radius > 0.0) || f.radius_y < 0.0) throw ConfigError("feature radius must be positive");
  }
}

}  // namespace

InitialState make_pressure_phantom(const PhantomSpec& spec, const Grid2D& grid) {
  validate_spec(spec);
  const double x_lo = grid.origin_x() + spec.support_margin;
  const double x_hi = grid.origin_x() + grid.width() - spec.support_margin;
  const double y_lo = grid.origin_y() + spec.support_margin;
  const double y_hi = grid.origin_y() + grid.height() - spec.support_margin;
  for (std::size_t n = 0; n < spec.features.size(); ++n) {
    const auto& f = spec.features[n];
    const double reach = std::max(f.radius, semi_axis_y(f));
    if (f.x - reach < x_lo || f.x + reach > x_hi || f.y - reach < y_lo || f.y + reach > y_hi) {
      throw ConfigError("phantom feature " + std::to_string(n) +
                        " overlaps the support margin of the domain");
    }
  }
  const ScalarField2D u0 = ScalarField2D::from_function(grid, [&](double x, double y) {
    double v = 0.0;
    for (const auto& f : spec.features) v += f.amplitude * pressure_profile(spec, f, x, y);
    return v;
  });
  return InitialState(u0.with_zero_boundary());
}

std::vector<PhantomFeature> shepp_like_features(const Grid2D& grid, double support_margin) {
  // (x, y, a, b, angle_deg, amplitude) on [-1,1]^2
  struct Ellipse {
    double x, y, a, b, angle, amp;
  };
  static constexpr Ellipse kEllipses[] = {
      {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},       {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
      {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},   {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},      {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
      {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1}, {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  };
  const double cx = grid.origin_x() + 0.5 * grid.width();
  const double cy = grid.origin_y() + 0.5 * grid.height();
  const double half = 0.5 * std::min(grid.width(), grid.height()) - support_margin;
  const double scale = 0.98 * half / 0.92;
  std::vector<PhantomFeature> out;
  for (const auto& e : kEllipses) {
    PhantomFeature f;
    f.x = cx + scale * e.x;
    f.y = cy + scale * e.y;
    f.radius = scale * e.a;
    f.radius_y = scale * e.b;
    f.angle = e.angle * std::numbers::pi / 180.0;
    f.amplitude = e.amp;
    out.push_back(f);
  }
  return out;
}

WaveSpeed make_speed_phantom(const PhantomSpec& spec, const Grid2D& grid,
                             const SpeedPhantomOptions& opts) {
  validate_spec(spec);
  if (!(opts.c_base > 0.0)) throw ConfigError("c_base must be positive");
  if (opts.variation < 0.0 || opts.variation > opts.max_variation) {
    throw ConfigError("speed variation must lie in [0, " + std::to_string(opts.max_variation) + "]");
  }
  if (opts.variation >= 1.0) {
    throw ConfigError("speed variation >= 1 would produce non-positive speeds");
  }
  const double spread = std::max(opts.variation, 0.1);
  const double c_low = opts.c_low > 0.0 ? opts.c_low : opts.c_base * (1.0 - spread);
  const double c_high = opts.c_high > 0.0 ? opts.c_high : opts.c_base * (1.0 + spread);

  std::vector<double> s(grid.size(), 0.0);
  if (opts.variation > 0.0) {
    for (std::size_t j = 0; j < grid.ny(); ++j) {
      for (std::size_t i = 0; i < grid.nx(); ++i) {
        const double x = grid.x(i);
        const double y = grid.y(j);
        double v = 0.0;
        for (const auto& f : spec.features) {
          if (spec.kind == PhantomKind::gaussians) {
            const double r = scaled_radius(f, x, y);
            v += f.amplitude * std::exp(-0.5 * r * r);
          } else {
            v += f.amplitude * tapered_plateau(scaled_radius(f, x, y), spec.edge_fraction);
          }
        }
        s[grid.index(i, j)] = v;
      }
    }
    double peak = 0.0;
    for (double v : s) peak = std::max(peak, std::abs(v));
    if (peak > 1.0) {
      for (double& v : s) v /= peak;
    }
  }
  std::vector<double> c(grid.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = opts.c_base * (1.0 + opts.variation * s[k]);
  return WaveSpeed(ScalarField2D(grid, std::move(c)), c_low, c_high);
}

PerturbationShapes make_perturbation_shapes(const Grid2D& grid, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  constexpr int kSpeedOrder = 3;
  constexpr int kStateOrder = 4;
  double a[kSpeedOrder + 1][kSpeedOrder + 1];
  double b[kStateOrder + 1][kStateOrder + 1];
  for (int k = 0; k <= kSpeedOrder; ++k) {
    for (int l = 0; l <= kSpeedOrder; ++l) a[k][l] = coef(gen) / (1.0 + k * k + l * l);
  }
  for (int k = 1; k <= kStateOrder; ++k) {
    for (int l = 1; l <= kStateOrder; ++l) b[k][l] = coef(gen) / static_cast<double>(k * k + l * l);
  }
  const double pi = std::numbers::pi;
  auto xi = [&](double x) { return (x - grid.origin_x()) / grid.width(); };
  auto eta = [&](double y) { return (y - grid.origin_y()) / grid.height(); };
  auto normalise = [](const ScalarField2D& f) {
    const double m = f.max_abs();
    return m > 0.0 ? (1.0 / m) * f : f;
  };

  const ScalarField2D speed = ScalarField2D::from_function(grid, [&](double x, double y) {
    double v = 0.0;
    for (int k = 0; k <= kSpeedOrder; ++k) {
      for (int l = 0; l <= kSpeedOrder; ++l) {
        v += a[k][l] * std::cos(k * pi * xi(x)) * std::cos(l * pi * eta(y));
      }
    }
    return v;
  });
  const ScalarField2D state = ScalarField2D::from_function(grid, [&](double x, double y) {
    double v = 0.0;
    for (int k = 1; k <= kStateOrder; ++k) {
      for (int l = 1; l <= kStateOrder; ++l) {
        v += b[k][l] * std::sin(k * pi * xi(x)) * std::sin(l * pi * eta(y));
      }
    }
    return v;
  });
  return {normalise(speed), normalise(state).with_zero_boundary()};
}

namespace {

WaveSpeed perturbed_speed(const WaveSpeed& c, const ScalarField2D& shape, double amplitude,
                          bool* clamped) {
  if (amplitude == 0.0) {
    if (clamped != nullptr) *clamped = false;
    return c;
  }
  const ScalarField2D q = c.inverse_square();
  const double scale = amplitude * q.max_abs();
  std::vector<double> out(q.size());
  bool hit = false;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double qt = q[k] + scale * shape[k];
    double ct = qt > 0.0 ? 1.0 / std::sqrt(qt) : c.c_high();
    if (ct < c.c_low() || ct > c.c_high()) {
      hit = true;
      ct = std::clamp(ct, c.c_low(), c.c_high());
    }
    out[k] = ct;
  }
  if (clamped != nullptr) *clamped = hit;
  return WaveSpeed(ScalarField2D(c.grid(), std::move(out)), c.c_low(), c.c_high());
}

InitialState perturbed_state(const InitialState& s, const ScalarField2D& shape, double amplitude) {
  if (amplitude == 0.0) return s;
  const double scale = amplitude * s.u0().max_abs();
  return InitialState((s.u0() + scale * shape).with_zero_boundary(), s.u1());
}

}  // namespace

PerturbedPair apply_perturbation(const WaveSpeed& c, const InitialState& s,
                                 const PerturbationShapes& shapes, double speed_amplitude,
                                 double state_amplitude) {
  require_same_grid(c.grid(), s.grid(), "apply_perturbation");
  WaveSpeed ct = perturbed_speed(c, shapes.speed, speed_amplitude, nullptr);
  InitialState st = perturbed_state(s, shapes.state, state_amplitude);
  const double sr = speed_discrepancy_ratio(c, ct);
  const double ur = state_discrepancy_ratio(s, st);
  return {std::move(ct), std::move(st), speed_amplitude, state_amplitude, sr, ur};
}

PerturbedPair perturb_pair(const WaveSpeed& c, const InitialState& s, double target_speed_ratio,
                           double target_state_ratio, std::uint64_t seed) {
  if (target_speed_ratio < 0.0 || target_state_ratio < 0.0) {
    throw ConfigError("perturbation targets must be non-negative");
  }
  if (!(state_mass(s) > 0.0)) throw DegenerateError("cannot perturb a zero-mass state");
  const PerturbationShapes shapes = make_perturbation_shapes(c.grid(), seed);

  // The state ratio is an exact quadratic form in the amplitude.
  double b = 0.0;
  if (target_state_ratio > 0.0) {
    const double unit = state_discrepancy_ratio(s, perturbed_state(s, shapes.state, 1.0));
    b = std::sqrt(target_state_ratio / unit);
  }

  double a = 0.0;
  if (target_speed_ratio > 0.0) {
    const ScalarField2D q = c.inverse_square();
    const double qn = norm_w1inf(q);
    const double unit = norm_w1inf(q.max_abs() * shapes.speed) / qn;
    a = std::sqrt(target_speed_ratio) / unit;
    bool clamped = false;
    const WaveSpeed trial = perturbed_speed(c, shapes.speed, a, &clamped);
    if (clamped) {
      // The clamp breaks the quadratic scaling; bracket and bisect on the amplitude.
      auto ratio = [&](double amp) {
        return speed_discrepancy_ratio(c, perturbed_speed(c, shapes.speed, amp, nullptr));
      };
      double lo = 0.0;
      double hi = a;
      double best = ratio(hi);
      for (int grow = 0; grow < 60 && best < target_speed_ratio; ++grow) {
        lo = hi;
        hi *= 2.0;
        const double r = ratio(hi);
        if (r <= best * (1.0 + 1e-12)) {
          throw SaturationError("speed perturbation target unreachable within speed bounds",
                                std::max(best, r));
        }
        best = r;
      }
      if (best < target_speed_ratio) {
        throw SaturationError("speed perturbation target unreachable within speed bounds", best);
      }
      double mid = hi;
      for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double r = ratio(mid);
        if (std::abs(r - target_speed_ratio) <= 0.01 * target_speed_ratio) break;
        (r < target_speed_ratio ? lo : hi) = mid;
      }
      a = mid;
    }
  }
  return apply_perturbation(c, s, shapes, a, b);
}

}  // namespace patlab
