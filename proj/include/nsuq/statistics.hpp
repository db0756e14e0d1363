#pragma once

#include "nsuq/random_data.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nsuq {

enum class Quantity { density, momentum };

std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

/// Weighted probability that the L-infinity norm of the solution exceeds each threshold.
struct BoundednessReport {
  EnsembleMode mode = EnsembleMode::weak;
  std::vector<double> thresholds;
  std::vector<double> exceedance;
  double unresolved_weight = 0.0; ///< mass of members that did not complete
};

/// Effective L-infinity statistic of a member: its recorded maximum if the solve
/// completed, +infinity otherwise (aborted members exceed every threshold).
double member_linf(const SolveReport& report);

/// Counting (weak: #{max > M} / N) or weighted (strong: sum of weights over exceeding members).
BoundednessReport boundedness_from_maxima(std::span<const double> maxima, std::span<const double> weights,
                                          EnsembleMode mode, std::span<const double> thresholds);

BoundednessReport boundedness_in_probability(const Ensemble& ensemble, std::span<const double> thresholds);

using TrajectoryFunctional = std::function<double(const Trajectory&)>;
using DataFunctional = std::function<double(const DataRecord&)>;

/// A small library of bounded continuous functionals on trajectories.
namespace functionals {

TrajectoryFunctional constant(double c);
/// Spatial mean of the density at snapshot `snapshot` (negative counts from the end).
TrajectoryFunctional mean_density(int snapshot = -1);
/// Real (part = 0) or imaginary (part = 1) part of the Fourier coefficient with wave vector k
/// of the given quantity/component at a snapshot.
TrajectoryFunctional fourier_coefficient(Quantity which, int component, std::array<int, 2> k, int part,
                                         int snapshot = -1);
/// W^{-m,2} norm in space-time of the chosen quantity.
TrajectoryFunctional neg_sobolev(Quantity which, int m);
TrajectoryFunctional tanh_of(TrajectoryFunctional f, double scale = 1.0);
TrajectoryFunctional clamp_of(TrajectoryFunctional f, double lo, double hi);
TrajectoryFunctional linear_combination(std::vector<std::pair<double, TrajectoryFunctional>> terms);

} // namespace functionals

struct MeanResult {
  double value = 0.0;
  double resolved_weight = 0.0;
  double unresolved_weight = 0.0;
  /// Naive CLT standard error sqrt(sum w_n (F_n - mean)^2 / N) over resolved members.
  double standard_error = 0.0;
};

/// Weighted mean of F over completed members, weights renormalised to the resolved mass.
MeanResult empirical_functional_mean(const Ensemble& ensemble, const TrajectoryFunctional& f);

/// Weighted mean of a data functional over all members (data never fail).
MeanResult empirical_data_mean(const Ensemble& ensemble, const DataFunctional& f);

struct FieldSeries {
  std::vector<double> times;
  std::vector<Field> fields;
  double unresolved_weight = 0.0;
};

/// Weighted pointwise mean of density or momentum at every snapshot time, on the
/// coarsest member grid. Members must share snapshot times.
FieldSeries empirical_field_mean(const Ensemble& ensemble, Quantity which);

struct BarycenterOptions {
  double tolerance = 1e-8; ///< first-order residual target
  int max_iterations = 500;
  bool force_iterative = false; ///< skip the r = q = 2 closed form
};

struct BarycenterResult {
  Field minimizer;
  double r = 2.0;
  double q = 2.0;
  double objective = 0.0;
  int iterations = 0;
  double first_order_residual = 0.0;
  bool converged = false;
  double unresolved_weight = 0.0;
};

/// sum_n w_n || Y_n - Z ||_{L^q}^r
double barycenter_objective(std::span<const Field> samples, std::span<const double> weights, const Field& candidate,
                            double r, double q);

/// max over cells of |dJ/dZ_c| / cell volume for the objective above.
double barycenter_residual(std::span<const Field> samples, std::span<const double> weights, const Field& candidate,
                           double r, double q);

/// Minimiser of sum_n w_n ||Y_n - Z||_{L^q}^r (r > 1, q >= 1), computed by Newton-CG with
/// backtracking from the weighted pointwise mean. r = q = 2 returns the mean directly.
/// For q = 1 the objective is not smooth; the result is flagged unless the residual target is met.
BarycenterResult r_barycenter(std::span<const Field> samples, std::span<const double> weights, double r, double q,
                              const BarycenterOptions& options = {});

/// Per-time-slice barycenter of the ensemble's density or momentum at snapshot `snapshot`.
BarycenterResult r_barycenter(const Ensemble& ensemble, Quantity which, double r, double q, int snapshot = -1,
                              const BarycenterOptions& options = {});

/// Member pairing between two levels: (index in A, index in B, probability weight).
struct MemberPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

/// Pairs every member of A with the member of B at the identical latent point
/// (common random numbers). Throws if some A member has no partner.
std::vector<MemberPair> pair_by_latent(const Ensemble& a, const Ensemble& b);

/// Pairs every member of the finer collocation ensemble B with the member of A whose cell
/// (in `coarse`) contains it; weights are B's cell volumes.
std::vector<MemberPair> pair_by_partition(const CollocationPartition& coarse, const Ensemble& a, const Ensemble& b);

struct ProbabilityTable {
  std::vector<double> eps;
  std::vector<double> exceedance;
  std::vector<double> distances; ///< per pair; +infinity if either member is unresolved
};

/// Weighted fraction of pairs whose space-time L^q distance exceeds each eps.
ProbabilityTable convergence_in_probability_diagnostic(const Ensemble& a, const Ensemble& b,
                                                       const std::vector<MemberPair>& pairs,
                                                       std::span<const double> eps, double q = 2.0);
/// Same, with latent pairing.
ProbabilityTable convergence_in_probability_diagnostic(const Ensemble& a, const Ensemble& b,
                                                       std::span<const double> eps, double q = 2.0);

/// Space-time L^q distance of one quantity between two trajectories with equal snapshot
/// times, finer restricted to the coarser grid.
double quantity_distance(const Trajectory& a, const Trajectory& b, Quantity which, double q);

/// sum_pairs w ||X_a - X_b||^r in space-time L^q for one quantity (expectation-norm error
/// of the piecewise constant approximation A against the reference B).
double expectation_norm_error(const Ensemble& a, const Ensemble& b, const std::vector<MemberPair>& pairs,
                              Quantity which, double q, double r);

struct EnergyMoment {
  std::vector<double> times;
  std::vector<double> mean_energy;
  double bound = 0.0;        ///< max over snapshot times of the weighted mean energy
  double time_of_max = 0.0;
  double unresolved_weight = 0.0;
};

/// sup over snapshot times of sum_n w_n E_n(t) over completed members (renormalised).
EnergyMoment energy_moment_bound(const Ensemble& ensemble);

} // namespace nsuq
