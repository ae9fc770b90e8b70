#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patlab/field.hpp"

namespace patlab {

enum class PhantomKind { disks, gaussians, shepp_like };

PhantomKind parse_phantom_kind(const std::string& name);
std::string to_string(PhantomKind kind);

/// One phantom feature. For pressure phantoms `radius` is the support radius
/// (semi-axis along the rotated x direction); for speed gaussians it is the
/// standard deviation.
struct PhantomFeature {
  double x = 0.5;
  double y = 0.5;
  double radius = 0.1;
  double amplitude = 1.0;
  double radius_y = 0.0;  ///< 0 selects a circular feature
  double angle = 0.0;     ///< rotation in radians (ellipses)
};

struct PhantomSpec {
  PhantomKind kind = PhantomKind::disks;
  std::vector<PhantomFeature> features;
  double support_margin = 0.05;
  /// Width of the cosine taper at disk and ellipse edges, as a fraction of the radius.
  double edge_fraction = 0.25;
  std::uint64_t seed = 0;
};

/// Smooth compactly supported u0 (zero within support_margin of the boundary)
/// and u1 = 0. Throws ConfigError when a feature reaches into the margin.
InitialState make_pressure_phantom(const PhantomSpec& spec, const Grid2D& grid);

/// Ellipses in the spirit of the Shepp-Logan head phantom, scaled to fit
/// inside the support margin of `grid`.
std::vector<PhantomFeature> shepp_like_features(const Grid2D& grid, double support_margin);

struct SpeedPhantomOptions {
  double c_base = 1.0;
  double variation = 0.0;  ///< relative amplitude, <= max_variation
  double max_variation = 0.10;
  /// Admissible bounds; non-positive values select c_base * (1 -/+ max(variation, 0.1)).
  double c_low = 0.0;
  double c_high = 0.0;
};

/// c = c_base * (1 + variation * s) with s a feature sum normalised to
/// max |s| <= 1.
WaveSpeed make_speed_phantom(const PhantomSpec& spec, const Grid2D& grid,
                             const SpeedPhantomOptions& opts);

/// Fixed random perturbation directions: `speed` acts on c^-2, `state` on u0
/// and vanishes on the boundary. Both are normalised to max |.| = 1.
struct PerturbationShapes {
  ScalarField2D speed;
  ScalarField2D state;
};

PerturbationShapes make_perturbation_shapes(const Grid2D& grid, std::uint64_t seed);

struct PerturbedPair {
  WaveSpeed c_tilde;
  InitialState s_tilde;
  double speed_amplitude = 0.0;
  double state_amplitude = 0.0;
  double speed_ratio_sq = 0.0;
  double state_ratio_sq = 0.0;
};

/// c~^-2 = c^-2 + a * max|c^-2| * shapes.speed (clamped into the speed bounds),
/// u0~ = u0 + b * max|u0| * shapes.state, u1~ = u1.
PerturbedPair apply_perturbation(const WaveSpeed& c, const InitialState& s,
                                 const PerturbationShapes& shapes, double speed_amplitude,
                                 double state_amplitude);

/// Pair whose speed and state discrepancy ratios match the targets within 1%.
/// Throws SaturationError when the speed bounds cap the reachable ratio.
PerturbedPair perturb_pair(const WaveSpeed& c, const InitialState& s, double target_speed_ratio,
                           double target_state_ratio, std::uint64_t seed);

}  // namespace patlab
