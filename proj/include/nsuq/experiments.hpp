#pragma once

#include "nsuq/io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nsuq {

enum class ExperimentMode { weak, strong, convergence };

std::string to_string(ExperimentMode m);
ExperimentMode experiment_mode_from_string(const std::string& s);

/// One rung of the refinement ladder.
struct LevelSpec {
  int n = 16;              ///< cells per spatial axis; h = period / n
  std::size_t samples = 1; ///< weak: sample count; strong: partition cells per latent axis

  bool operator==(const LevelSpec&) const = default;
};

/// A named trajectory functional assembled from a small declarative vocabulary.
struct FunctionalSpec {
  std::string name;
  std::string kind = "mean_density"; ///< mean_density | fourier | neg_sobolev
  Quantity quantity = Quantity::density;
  int component = 0;
  std::array<int, 2> k{1, 0};
  int part = 0;
  int m = 3;
  int snapshot = -1;
  double tanh_scale = 0.0; ///< > 0 wraps the functional in tanh(scale * F)

  TrajectoryFunctional build() const;
  bool operator==(const FunctionalSpec&) const = default;
};

struct BarycenterRequest {
  double r = 2.0;
  double q = 2.0;
  Quantity quantity = Quantity::density;

  bool operator==(const BarycenterRequest&) const = default;
};

struct StatisticsRequest {
  std::vector<double> thresholds{2.0, 5.0, 10.0}; ///< L-infinity thresholds M
  std::vector<double> eps{1e-3, 1e-2, 1e-1};      ///< diagnostic thresholds
  std::vector<BarycenterRequest> barycenters{{2.0, 2.0, Quantity::density}};
  std::vector<FunctionalSpec> functionals{{"mean_density"}};
  double distance_q = 2.0;      ///< space-time L^q for the cross-level diagnostic
  double expectation_r = 1.0;   ///< power r of the strong expectation-norm error
  int data_error_probes = 8;    ///< probe lattice per latent axis for the collocation data error

  bool operator==(const StatisticsRequest&) const = default;
};

/// Deterministic refinement study settings (run-convergence).
struct ConvergenceSpec {
  std::string problem = "manufactured"; ///< manufactured | equilibrium | self
  double amplitude = 0.1;               ///< manufactured density amplitude
  double flux_offset = 0.5;
  int reference_n = 0; ///< self-convergence reference (0: twice the finest ladder n)

  bool operator==(const ConvergenceSpec&) const = default;
};

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::weak;
  std::vector<LevelSpec> ladder{{16, 16}};
  SchemeConfig scheme;
  DistributionSpec distribution;
  StatisticsRequest statistics;
  ConvergenceSpec convergence;
  CollocationPartition::PointRule point_rule = CollocationPartition::PointRule::center;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  double failure_budget = 0.1; ///< unresolved weight above this marks a level tainted
  bool save_trajectories = false;

  /// Throws ConfigError on an empty or non-monotone ladder or invalid nested specs.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

void to_json(Json& j, const ExperimentConfig& c);
void from_json(const Json& j, ExperimentConfig& c);

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Hash of the canonical serialisation of the config (seed included, output_dir excluded).
std::string config_hash(const ExperimentConfig& c);

/// Version string embedded in every report.
std::string code_version();

struct ExperimentReport {
  Json json;                         ///< complete structured report
  std::vector<bool> tainted;         ///< per level
  std::filesystem::path output_dir;  ///< where artefacts were written (empty if none)

  bool any_tainted() const;
};

struct RunOptions {
  int threads = 1;
  bool write_outputs = true; ///< false: compute the report without touching the filesystem
};

ExperimentReport run_weak(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentReport run_strong(const ExperimentConfig& config, const RunOptions& options = {});
/// Error table of the deterministic problem in config.convergence over the ladder grids.
ExperimentReport run_deterministic_convergence(const ExperimentConfig& config, const RunOptions& options = {});

/// Dispatches on config.mode.
ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Thread count from the flag if given, else from NSUQ_THREADS, else 1.
int resolve_thread_count(std::optional<int> flag);

} // namespace nsuq
