#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>

#include "patlab/field.hpp"
#include "patlab/grid.hpp"
#include "patlab/norms.hpp"
#include "patlab/phantom.hpp"
#include "patlab/trace.hpp"

namespace testing_support {

using namespace patlab;

inline constexpr double kPi = std::numbers::pi;

inline ScalarField2D sine_mode(const Grid2D& g, double amplitude = 1.0) {
  return ScalarField2D::from_function(
             g, [=](double x, double y) { return amplitude * std::sin(kPi * x) * std::sin(kPi * y); })
      .with_zero_boundary();
}

inline ScalarField2D random_field(const Grid2D& g, std::uint64_t seed, bool zero_boundary) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(g.size());
  for (double& x : v) x = dist(rng);
  ScalarField2D f(g, std::move(v));
  return zero_boundary ? f.with_zero_boundary() : f;
}

inline BoundaryTrace random_trace(const Grid2D& g, double dt, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(g.boundary_size() * n);
  for (double& x : v) x = dist(rng);
  return BoundaryTrace(g, dt, n, std::move(v));
}

/// Two tapered disks, the reference reconstruction phantom.
inline PhantomSpec two_disks() {
  PhantomSpec spec;
  spec.kind = PhantomKind::disks;
  spec.features = {{0.45, 0.5, 0.2, 1.0}, {0.65, 0.35, 0.1, 0.5}};
  return spec;
}

inline double relative_h0(const ScalarField2D& estimate, const ScalarField2D& truth) {
  return norm_h0(estimate - truth) / norm_h0(truth);
}

/// Fresh, empty scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("patlab-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace testing_support
