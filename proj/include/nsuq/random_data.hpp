#pragma once

#include "nsuq/physics.hpp"
#include "nsuq/solver.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nsuq {

/// A point of the latent cube [0,1]^K; the probability space is the cube with Lebesgue measure.
struct LatentPoint {
  std::vector<double> coords;

  std::size_t dim() const { return coords.size(); }
  bool operator==(const LatentPoint&) const = default;
};

/// Inverse-CDF transform of one latent coordinate onto a scalar parameter.
struct ParameterTransform {
  enum class Kind { constant, uniform, truncated_normal };

  Kind kind = Kind::constant;
  int coord = -1;       ///< latent coordinate driving the parameter (ignored for constant)
  double value = 0.0;   ///< constant value
  double lo = 0.0;      ///< support [lo, hi] for uniform / truncated normal
  double hi = 0.0;
  double mean = 0.0;    ///< truncated normal location
  double sd = 1.0;      ///< truncated normal scale

  static ParameterTransform constant_value(double v);
  static ParameterTransform uniform(int coord, double lo, double hi);
  static ParameterTransform truncated_normal(int coord, double lo, double hi, double mean, double sd);

  double operator()(const LatentPoint& omega) const;
  double min_value() const;
  double max_value() const;
  /// Lipschitz constant with respect to the driving coordinate.
  double lipschitz() const;

  bool operator==(const ParameterTransform&) const = default;
};

/// Fourier mode whose amplitudes are affine in one latent coordinate:
/// (cos_base + cos_slope w) cos(2 pi k.x / L) + (sin_base + sin_slope w) sin(2 pi k.x / L).
struct RandomMode {
  std::array<int, 2> k{0, 0};
  int component = 0;
  int coord = -1; ///< -1: amplitudes fixed at the base values
  double cos_base = 0.0;
  double cos_slope = 0.0;
  double sin_base = 0.0;
  double sin_slope = 0.0;

  double cos_amp(const LatentPoint& omega) const;
  double sin_amp(const LatentPoint& omega) const;
  /// max over the cube of the mode's pointwise amplitude sqrt(cos_amp^2 + sin_amp^2).
  double max_amplitude() const;

  bool operator==(const RandomMode&) const = default;
};

/// Band-limited random field: per-component mean plus random modes.
struct RandomFieldSpec {
  std::vector<double> mean;
  std::vector<RandomMode> modes;

  bool operator==(const RandomFieldSpec&) const = default;
};

struct RandomForcingSpec {
  std::vector<RandomMode> modes;
  std::vector<double> envelope{1.0};
  double horizon = 1.0;

  bool operator==(const RandomForcingSpec&) const = default;
};

/// Measurable map from [0,1]^K into the admissible set.
/// Construction-time validation (validate()) guarantees the whole image is admissible.
struct DistributionSpec {
  int K = 1;
  int dim = 1;
  double period = 1.0;
  double gamma = 2.0;
  AdmissibleBounds bounds;
  ParameterTransform mu = ParameterTransform::constant_value(1.0);
  ParameterTransform eta = ParameterTransform::constant_value(0.0);
  ParameterTransform a = ParameterTransform::constant_value(1.0);
  RandomFieldSpec rho0{{1.0}, {}};
  RandomFieldSpec u0{{0.0}, {}};
  RandomForcingSpec g;
  /// Sobolev order of the data-distance surrogate norm.
  double sobolev_order = 2.0;

  /// Throws std::invalid_argument if some latent point maps outside the admissible set.
  void validate() const;
  /// Lipschitz constant of the map (latent l-infinity metric -> data_distance).
  double lipschitz() const;

  bool operator==(const DistributionSpec&) const = default;
};

/// Deterministic, index-addressable uniform stream: point n depends only on (seed, n).
LatentPoint latent_point(std::uint64_t seed, std::uint64_t index, int K);
std::vector<LatentPoint> sample_latent(std::uint64_t seed, std::size_t count, int K);

/// Data record at a latent point, discretised on `grid` (modes sampled at cell centres).
DataRecord realize_data(const DistributionSpec& spec, const LatentPoint& omega, const GridSpec& grid);

/// Surrogate data-space distance: parameter differences plus Sobolev-weighted Fourier
/// norms of the field and forcing differences.
double data_distance(const DataRecord& x, const DataRecord& y, double sobolev_order);

struct LatentBox {
  std::vector<double> lo, hi;

  double volume() const;
  bool contains(const LatentPoint& omega) const;
};

/// Uniform tensor partition of the latent cube with one collocation point per cell.
struct CollocationPartition {
  enum class PointRule { center, random_in_cell };

  int K = 1;
  int per_axis = 1;
  PointRule rule = PointRule::center;
  std::vector<LatentBox> cells;
  std::vector<LatentPoint> points;
  std::vector<double> weights;

  std::size_t size() const { return cells.size(); }
  /// Index of the cell containing omega (cells are half-open except at the upper face of the cube).
  std::size_t locate(const LatentPoint& omega) const;
};

std::string to_string(CollocationPartition::PointRule r);
CollocationPartition::PointRule point_rule_from_string(const std::string& s);

inline constexpr std::size_t kMaxPartitionCells = std::size_t{1} << 20;

CollocationPartition build_partition(int K, int per_axis,
                                     CollocationPartition::PointRule rule = CollocationPartition::PointRule::center,
                                     std::uint64_t seed = 0);

/// Piecewise-constant data map: cell n carries realize_data(spec, points[n]).
struct CollocatedData {
  CollocationPartition partition;
  std::vector<DataRecord> records;

  const DataRecord& at(const LatentPoint& omega) const { return records[partition.locate(omega)]; }
};

CollocatedData collocate_data(const DistributionSpec& spec, const CollocationPartition& partition,
                              const GridSpec& grid);

/// max over a uniform probe lattice ((probes + 1)^K points, endpoints included) of
/// data_distance(collocated(omega), realize(omega)).
double collocation_sup_error(const DistributionSpec& spec, const CollocatedData& collocated, const GridSpec& grid,
                             int probes_per_axis);

/// Tensor midpoint rule for the expectation of a latent functional over the cube.
double latent_expectation(const std::function<double(const LatentPoint&)>& f, int K, int points_per_axis);

enum class EnsembleMode { weak, strong };

std::string to_string(EnsembleMode m);
EnsembleMode ensemble_mode_from_string(const std::string& s);

struct EnsembleMember {
  LatentPoint latent;
  DataRecord data;
  SolveReport report;
};

/// Weighted collection of solves: weights 1/N (weak) or cell volumes (strong).
struct Ensemble {
  EnsembleMode mode = EnsembleMode::weak;
  std::vector<EnsembleMember> members;
  std::vector<double> weights;

  std::size_t size() const { return members.size(); }
  /// Throws if weights are not positive or do not sum to one (tolerance 1e-12).
  void validate() const;
};

/// Samples N latent points, realises and solves them (members solved concurrently;
/// the result does not depend on the thread count).
Ensemble build_weak_ensemble(const DistributionSpec& spec, const GridSpec& grid, const SchemeConfig& cfg,
                             std::uint64_t seed, std::size_t count, int threads = 1);

Ensemble build_strong_ensemble(const DistributionSpec& spec, const GridSpec& grid, const SchemeConfig& cfg,
                               const CollocationPartition& partition, int threads = 1);

/// Ensemble from explicit latent points and weights (used for both modes).
Ensemble build_ensemble(const DistributionSpec& spec, const GridSpec& grid, const SchemeConfig& cfg,
                        const std::vector<LatentPoint>& points, const std::vector<double>& weights,
                        EnsembleMode mode, int threads = 1);

} // namespace nsuq
