#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "patlab/config.hpp"
#include "patlab/reconstruct.hpp"
#include "patlab/verifier.hpp"

namespace patlab {

/// A write-once output directory holding a copy of the config, a manifest and
/// the command outputs. Creation fails if the directory exists and is not empty.
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path dir, const std::string& config_text, std::uint64_t seed,
               const std::string& command);

  const std::filesystem::path& path() const noexcept { return dir_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t hash() const noexcept { return hash_; }
  /// "# seed=<seed>,config_hash=<hex>" appended to every CSV.
  std::string footer() const;

  /// Path for a new output; throws Error if it already exists.
  std::filesystem::path output(const std::string& name);
  void write_text(const std::string& name, const std::string& content);
  void note(const std::string& line);
  /// Rewrites manifest.txt with the outputs and notes collected so far.
  void finish() const;

 private:
  std::filesystem::path dir_;
  std::uint64_t seed_;
  std::uint64_t hash_;
  std::string command_;
  std::vector<std::string> outputs_;
  std::vector<std::string> notes_;
};

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
};

/// Synthetic truth from the config.
InitialState truth_state(const ExperimentConfig& cfg, const Grid2D& grid);
WaveSpeed truth_speed(const ExperimentConfig& cfg, const Grid2D& grid);

/// (speed, state) ratio targets per member. Member i draws from
/// derive_seed(seed, i); log-uniform state targets pair with
/// speed = speed_fraction * epsilon * state.
std::vector<std::pair<double, double>> ensemble_targets(const ExperimentConfig& cfg, double epsilon);

/// Perturbed pairs around the config truth on `grid`, built in parallel.
std::vector<EnsembleMember> build_ensemble(const ExperimentConfig& cfg, const Grid2D& grid,
                                           const std::vector<std::pair<double, double>>& targets,
                                           std::size_t workers);

void write_report_csv(std::ostream& out, const StabilityReport& report, double epsilon,
                      const std::string& footer);
void write_history_csv(std::ostream& out, const IterateHistory& history, const std::string& footer);

/// Each returns the process exit code: 0 ok, 1 uniqueness violations.
/// Errors propagate as exceptions.
int cmd_simulate(const ExperimentConfig& cfg, RunDirectory& run, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, RunDirectory& run, std::size_t workers,
               std::ostream& log);
int cmd_reconstruct(const ExperimentConfig& cfg, RunDirectory& run, std::ostream& log);
int cmd_sweep(const ExperimentConfig& cfg, RunDirectory& run, std::size_t workers,
              std::ostream& log);

/// Loads the config, prepares the run directory and dispatches. Exceptions
/// are reported on `err` and mapped to exit code 2.
int run_command(const std::string& command, const RunOptions& opts, std::ostream& log,
                std::ostream& err);

}  // namespace patlab
