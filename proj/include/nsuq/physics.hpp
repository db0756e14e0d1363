#pragma once

#include "nsuq/fluid_state.hpp"
#include "nsuq/torus_mesh.hpp"

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsuq {

/// Raised when a state or datum leaves the admissible region (e.g. non-positive density).
class AdmissibilityError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// One spatial Fourier mode of the forcing, acting on a single velocity component:
/// cos_amp * cos(2 pi k.x / L) + sin_amp * sin(2 pi k.x / L).
struct ForcingMode {
  std::array<int, 2> k{0, 0};
  int component = 0;
  double cos_amp = 0.0;
  double sin_amp = 0.0;

  bool operator==(const ForcingMode&) const = default;
};

/// Body force per unit mass: finitely many Fourier modes times a polynomial
/// envelope in time, plus an optional extra term with a declared sup bound
/// (used for manufactured solutions).
struct Forcing {
  using Extra = std::function<void(double t, std::array<double, 2> x, std::span<double> out)>;

  std::vector<ForcingMode> modes;
  std::vector<double> envelope{1.0}; ///< coefficients c_j of sum_j c_j t^j
  double horizon = 1.0;              ///< time interval [0, horizon] covered by sup_bound
  Extra extra;
  double extra_sup = 0.0;

  bool is_zero() const;
  double envelope_at(double t) const;
  /// Adds g(t, x) into out (length = dim).
  void evaluate(double t, std::array<double, 2> x, double period, std::span<double> out) const;
  /// Computable upper bound of sup |g| over [0, horizon] x T^d.
  double sup_bound(int dim) const;
};

/// One point [rho0, u0, mu, eta, a, g] of the data space, discretised on a grid.
/// gamma is an experiment-level constant carried alongside.
struct DataRecord {
  Field rho0;
  Field u0;
  double mu = 1.0;
  double eta = 0.0;
  double a = 1.0;
  double gamma = 2.0;
  Forcing g;

  const GridSpec& grid() const { return rho0.grid(); }
  FluidState initial_state() const { return FluidState::from_velocity(rho0, u0, 0.0); }
};

/// Deterministic bounds defining the admissible set.
struct AdmissibleBounds {
  double rho_lower = 1.0;
  double mu_lower = 1.0;
  double a_lower = 1.0;
  double a_upper = 1.0;
  double g_sup = 1.0;

  void validate() const;
  bool operator==(const AdmissibleBounds&) const = default;
};

enum class Constraint { none, density, shear_viscosity, bulk_viscosity, pressure_coefficient, forcing };

std::string to_string(Constraint c);

struct AdmissibilityVerdict {
  Constraint violated = Constraint::none;
  std::string detail;

  bool admissible() const { return violated == Constraint::none; }
  explicit operator bool() const { return admissible(); }
};

/// Membership test for the admissible set; reports the first violated inequality in the
/// order density, mu, eta, a, g.
AdmissibilityVerdict validate_admissible(const DataRecord& data, const AdmissibleBounds& bounds);

// Barotropic equation of state p = a rho^gamma and its potential P = a rho^gamma / (gamma - 1).
double pressure(double rho, double a, double gamma);
double pressure_derivative(double rho, double a, double gamma);
double pressure_potential(double rho, double a, double gamma);
/// Extended-precision evaluation, used for finite-difference derivative checks.
long double pressure_potential(long double rho, long double a, long double gamma);
double pressure_potential_derivative(double rho, double a, double gamma);
double sound_speed(double rho, double a, double gamma);

/// Symmetric d x d tensor (d <= 2) stored row-major.
struct StressTensor {
  int dim = 1;
  std::array<double, 4> v{};

  double operator()(int i, int j) const { return v[i * 2 + j]; }
  double& operator()(int i, int j) { return v[i * 2 + j]; }
  double trace() const;
  bool is_symmetric(double tol = 0.0) const;
};

using VelocityGradient = std::array<double, 4>; ///< row-major, entry (i, j) = d u_i / d x_j

/// Linear viscous stress mu (grad u + grad u^T - (2/d) div u I) + eta div u I.
/// In 1-D the deviatoric part vanishes identically; the effective coefficient
/// mu + eta is used instead so that S = (mu + eta) u_x.
StressTensor viscous_stress(const VelocityGradient& grad_u, double mu, double eta, int dim);

/// Effective coefficient multiplying u_xx in the 1-D momentum equation.
inline double effective_viscosity_1d(double mu, double eta) { return mu + eta; }

/// Energy density (1/2) |m|^2 / rho + P(rho) for a single cell.
double energy_density(double rho, std::span<const double> momentum, double a, double gamma);

/// Midpoint-quadrature total energy of a state. Throws AdmissibilityError on rho <= 0.
double total_energy(const FluidState& state, double a, double gamma);

} // namespace nsuq
