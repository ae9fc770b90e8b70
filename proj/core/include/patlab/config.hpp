#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "patlab/phantom.hpp"
#include "patlab/reconstruct.hpp"
#include "patlab/wave.hpp"

namespace patlab {

/// Flat sectioned text:
///
///   # comment
///   [section]
///   key = value
///
/// Sections may repeat (e.g. one [phantom.feature] per feature). Values are
/// integers, floats or bare strings; lists are comma separated.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct ConfigSection {
  std::string name;
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;
};

struct ConfigDocument {
  std::vector<ConfigSection> sections;
};

/// Throws ConfigError carrying the offending line number.
ConfigDocument parse_config(const std::string& text);

/// 64-bit FNV-1a of the raw bytes.
std::uint64_t config_hash(const std::string& text);

enum class TargetMode { log_uniform, fixed };
enum class ReconstructMode { fixed_speed, joint };

struct PerturbationConfig {
  TargetMode mode = TargetMode::log_uniform;
  double state_min = 1e-3;
  double state_max = 1e-1;
  /// log_uniform: speed ratio = speed_fraction * epsilon * state ratio.
  double speed_fraction = 0.5;
  double state_target = 1e-2;
  double speed_target = 5e-5;
};

struct VerifyConfig {
  double epsilon = 1e-2;
  std::size_t members = 50;
  double k = 0.0;
  double K = 0.0;
  double state_threshold = 1e-4;
  double meas_threshold = 1e-16;
};

struct ReconstructRunConfig {
  ReconstructMode mode = ReconstructMode::fixed_speed;
  ReconstructionConfig params;
  /// Pressure start: "zero" or "truth".
  std::string pressure_init = "zero";
  /// Speed start for joint mode: "constant" (c_init) or "truth".
  std::string speed_init = "constant";
  double c_init = 1.0;
  /// Standard deviation of additive Gaussian trace noise, relative to max |m|.
  double noise_level = 0.0;
  std::size_t checkpoint_stride = 0;
  /// Monitor errors against the synthetic truth.
  bool monitor_truth = true;
};

struct SweepConfig {
  std::vector<double> epsilon;
  std::vector<std::size_t> cells;
  std::vector<double> state_target;
  std::vector<double> speed_target;
};

struct ExperimentConfig {
  std::size_t cells = 64;  ///< cells per axis on the unit square
  SolverConfig solver;
  bool auto_final_time = true;  ///< final_time = 3 * diam / c_low
  double gamma = 1.0;
  PhantomSpec pressure;
  PhantomSpec speed_shape;
  SpeedPhantomOptions speed;
  PerturbationConfig perturbation;
  VerifyConfig verify;
  ReconstructRunConfig reconstruct;
  SweepConfig sweep;
  std::uint64_t seed = 0;
  std::size_t workers = 0;  ///< 0 = default_worker_count()
  std::string output_dir;

  Grid2D grid() const;
  /// Solver settings with the observation time resolved.
  SolverConfig resolved_solver() const;
  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Throws ConfigError with line numbers for unknown sections or keys and
/// malformed values.
ExperimentConfig load_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config_file(const std::filesystem::path& path);

}  // namespace patlab
