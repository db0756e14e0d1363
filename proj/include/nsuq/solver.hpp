#pragma once

#include "nsuq/fluid_state.hpp"
#include "nsuq/physics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nsuq {

/// Time-stepping parameters.
///
/// The scheme is backward Euler with upwind convective fluxes (mass flux upwinded on the
/// face-averaged velocity, momentum flux upwinded on the mass flux) and centred pressure
/// gradient / viscous operators. The nonlinear system is solved by Picard iteration:
/// a linear mass solve with lagged face velocities followed by a linear momentum solve.
struct SchemeConfig {
  double cfl = 0.5;
  double final_time = 0.1;
  /// true: pressure and viscosity taken at the new time level; false: lagged.
  bool theta_implicit = true;
  double linf_ceiling = 1e4;
  double picard_tol = 1e-10;
  int picard_max_iter = 100;
  /// Number of uniform output intervals; snapshots are stored at j * T / output_intervals.
  int output_intervals = 10;
  /// Artificial density diffusion h^exponent on the mass flux; negative disables it.
  double density_diffusion_exponent = 1.0;
  int max_steps = 1000000;
  /// Maximum number of dt halvings after a Picard failure.
  int max_dt_halvings = 6;

  void validate() const;
  bool operator==(const SchemeConfig&) const = default;
};

enum class SolveStatus { completed, aborted_linf, aborted_vacuum, no_convergence };

std::string to_string(SolveStatus s);
SolveStatus solve_status_from_string(const std::string& s);

struct StepOutcome {
  FluidState state;
  SolveStatus status = SolveStatus::completed;
  int iterations = 0;
  double residual = 0.0;

  bool ok() const { return status == SolveStatus::completed; }
};

/// Advances one implicit step of size dt. On success the returned pair
/// (state, outcome.state) has scheme_residual <= cfg.picard_tol.
StepOutcome step(const FluidState& state, const DataRecord& data, double dt, const SchemeConfig& cfg);

/// Max-norm defect of the implicit algebraic system for the pair (before, after),
/// measured in units of density and momentum (i.e. multiplied through by dt).
double scheme_residual(const DataRecord& data, const FluidState& before, const FluidState& after, double dt,
                       const SchemeConfig& cfg);

/// cfl * min(dx / (|u|_max + c_max), dx^2 rho_min / (2 d (2 mu + eta))).
double cfl_dt(const FluidState& state, const DataRecord& data, const SchemeConfig& cfg);

struct SolveReport {
  Trajectory trajectory;            ///< snapshots at the output times reached
  std::vector<double> step_times;   ///< t_0 = 0, then the time after every step
  std::vector<double> linf_history; ///< max(|rho|, |u|) at every entry of step_times
  std::vector<double> energy_history;
  SolveStatus status = SolveStatus::completed;
  int steps = 0;
  int picard_iterations = 0;
  double max_step_residual = 0.0;

  bool completed() const { return status == SolveStatus::completed; }
  double max_linf() const;
  double final_energy() const { return energy_history.empty() ? 0.0 : energy_history.back(); }
};

/// Integrates the data from t = 0 to cfg.final_time (or until an abort). Deterministic.
SolveReport solve(const DataRecord& data, const SchemeConfig& cfg);

/// Discrete Gronwall bound for the implicit scheme with forcing bounded by g_sup:
/// sqrt(E(t)) <= sqrt(E0) + t g_sup sqrt(2 M), hence E(t) <= 2 E0 + 4 T^2 g_sup^2 M.
double energy_gronwall_bound(double initial_energy, double mass, double g_sup, double horizon);

/// A data family with a known exact solution, parameterised by the grid.
struct ExactProblem {
  std::function<DataRecord(const GridSpec&)> make_data;
  /// Exact (rho, momentum) at time t and point x; momentum has dim entries.
  std::function<void(double t, std::array<double, 2> x, double& rho, std::span<double> m)> exact;
};

/// Smooth travelling-density solution of the 1-D system with manufactured momentum forcing:
/// rho = 1 + amp sin(2 pi (x - t)), m = rho + flux_offset (so u = 1 + flux_offset / rho).
ExactProblem manufactured_wave_problem(double amp = 0.1, double flux_offset = 0.5, double mu = 0.01,
                                       double eta = 0.0, double a = 1.0, double gamma = 2.0, double horizon = 1.0);

/// Constant-density rest state; every grid reproduces it exactly.
ExactProblem equilibrium_problem(int dim, double rho = 1.0, double mu = 0.01, double a = 1.0, double gamma = 2.0);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  double density_error = 0.0;  ///< L^1((0,T) x T^d)
  double momentum_error = 0.0; ///< L^1((0,T) x T^d)
  double error = 0.0;          ///< density_error + momentum_error
  double order = 0.0;          ///< log2(e_{2h} / e_h); 0 in the first row
  SolveStatus status = SolveStatus::completed;
};

/// Space-time L^1 error against an exact solution over a refinement sequence.
std::vector<ConvergenceRow> manufactured_convergence(const ExactProblem& problem, const std::vector<GridSpec>& grids,
                                                     const SchemeConfig& cfg);

/// Space-time L^1 error of each grid against a reference solve on `reference`
/// (the reference is restricted to each coarser grid).
std::vector<ConvergenceRow> self_convergence(const std::function<DataRecord(const GridSpec&)>& make_data,
                                             const std::vector<GridSpec>& grids, const GridSpec& reference,
                                             const SchemeConfig& cfg);

/// Space-time L^q distance between two trajectories with identical snapshot times,
/// after restricting the finer one to the coarser grid. Combines density and momentum.
double trajectory_distance(const Trajectory& a, const Trajectory& b, double q);

} // namespace nsuq
