#include "nsuq/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nsuq {

bool Forcing::is_zero() const {
  if (extra) return false;
  bool env_zero = std::all_of(envelope.begin(), envelope.end(), [](double c) { return c == 0.0; });
  bool modes_zero = std::all_of(modes.begin(), modes.end(),
                                [](const ForcingMode& m) { return m.cos_amp == 0.0 && m.sin_amp == 0.0; });
  return env_zero || modes_zero;
}

double Forcing::envelope_at(double t) const {
  double v = 0.0;
  for (auto it = envelope.rbegin(); it != envelope.rend(); ++it) v = v * t + *it;
  return v;
}

void Forcing::evaluate(double t, std::array<double, 2> x, double period, std::span<double> out) const {
  if (!modes.empty()) {
    const double env = envelope_at(t);
    for (const auto& m : modes) {
      if (m.component < 0 || m.component >= static_cast<int>(out.size()))
        throw ShapeError("Forcing: mode component out of range");
      double phase = 0.0;
      for (std::size_t a = 0; a < out.size() && a < 2; ++a) phase += m.k[a] * x[a];
      phase *= 2.0 * std::numbers::pi / period;
      out[m.component] += env * (m.cos_amp * std::cos(phase) + m.sin_amp * std::sin(phase));
    }
  }
  if (extra) extra(t, x, out);
}

double Forcing::sup_bound(int dim) const {
  double env = 0.0;
  for (std::size_t j = 0; j < envelope.size(); ++j) env += std::abs(envelope[j]) * std::pow(horizon, static_cast<double>(j));
  std::array<double, 2> amp{0.0, 0.0};
  for (const auto& m : modes) {
    if (m.component >= 0 && m.component < dim) amp[m.component] += std::hypot(m.cos_amp, m.sin_amp);
  }
  double s = 0.0;
  for (int c = 0; c < dim; ++c) s += amp[c] * amp[c];
  return env * std::sqrt(s) + (extra ? extra_sup : 0.0);
}

void AdmissibleBounds::validate() const {
  if (!(rho_lower > 0.0)) throw std::invalid_argument("AdmissibleBounds: rho_lower must be positive");
  if (!(mu_lower > 0.0)) throw std::invalid_argument("AdmissibleBounds: mu_lower must be positive");
  if (!(a_lower > 0.0) || !(a_lower <= a_upper))
    throw std::invalid_argument("AdmissibleBounds: need 0 < a_lower <= a_upper");
  if (!(g_sup > 0.0)) throw std::invalid_argument("AdmissibleBounds: g_sup must be positive");
}

std::string to_string(Constraint c) {
  switch (c) {
  case Constraint::none: return "none";
  case Constraint::density: return "density";
  case Constraint::shear_viscosity: return "shear_viscosity";
  case Constraint::bulk_viscosity: return "bulk_viscosity";
  case Constraint::pressure_coefficient: return "pressure_coefficient";
  case Constraint::forcing: return "forcing";
  }
  return "unknown";
}

AdmissibilityVerdict validate_admissible(const DataRecord& data, const AdmissibleBounds& bounds) {
  auto fail = [](Constraint c, double value, const char* rel, double bound) {
    std::ostringstream os;
    os << to_string(c) << ": " << value << " violates " << rel << ' ' << bound;
    return AdmissibilityVerdict{c, os.str()};
  };
  auto rv = data.rho0.values();
  const double inf_rho = rv.empty() ? 0.0 : *std::min_element(rv.begin(), rv.end());
  if (!(inf_rho >= bounds.rho_lower)) return fail(Constraint::density, inf_rho, ">=", bounds.rho_lower);
  if (!(data.mu >= bounds.mu_lower)) return fail(Constraint::shear_viscosity, data.mu, ">=", bounds.mu_lower);
  if (!(data.eta >= 0.0)) return fail(Constraint::bulk_viscosity, data.eta, ">=", 0.0);
  if (!(data.a >= bounds.a_lower)) return fail(Constraint::pressure_coefficient, data.a, ">=", bounds.a_lower);
  if (!(data.a <= bounds.a_upper)) return fail(Constraint::pressure_coefficient, data.a, "<=", bounds.a_upper);
  const double gsup = data.g.sup_bound(data.grid().dim);
  if (!(gsup <= bounds.g_sup)) return fail(Constraint::forcing, gsup, "<=", bounds.g_sup);
  return {};
}

double pressure(double rho, double a, double gamma) {
  if (rho < 0.0) throw std::domain_error("pressure: negative density");
  return a * std::pow(rho, gamma);
}

double pressure_derivative(double rho, double a, double gamma) {
  if (rho < 0.0) throw std::domain_error("pressure_derivative: negative density");
  return a * gamma * std::pow(rho, gamma - 1.0);
}

double pressure_potential(double rho, double a, double gamma) {
  if (!(gamma > 1.0)) throw std::domain_error("pressure_potential: gamma must exceed 1");
  if (rho < 0.0) throw std::domain_error("pressure_potential: negative density");
  return a * std::pow(rho, gamma) / (gamma - 1.0);
}

long double pressure_potential(long double rho, long double a, long double gamma) {
  if (!(gamma > 1.0L)) throw std::domain_error("pressure_potential: gamma must exceed 1");
  if (rho < 0.0L) throw std::domain_error("pressure_potential: negative density");
  return a * std::pow(rho, gamma) / (gamma - 1.0L);
}

double pressure_potential_derivative(double rho, double a, double gamma) {
  if (!(gamma > 1.0)) throw std::domain_error("pressure_potential_derivative: gamma must exceed 1");
  if (rho < 0.0) throw std::domain_error("pressure_potential_derivative: negative density");
  return a * gamma / (gamma - 1.0) * std::pow(rho, gamma - 1.0);
}

double sound_speed(double rho, double a, double gamma) { return std::sqrt(pressure_derivative(rho, a, gamma)); }

double StressTensor::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim; ++i) t += (*this)(i, i);
  return t;
}

bool StressTensor::is_symmetric(double tol) const {
  return dim < 2 || std::abs((*this)(0, 1) - (*this)(1, 0)) <= tol;
}

StressTensor viscous_stress(const VelocityGradient& grad_u, double mu, double eta, int dim) {
  if (dim < 1 || dim > 2) throw ShapeError("viscous_stress: dimension must be 1 or 2");
  StressTensor s;
  s.dim = dim;
  if (dim == 1) {
    s(0, 0) = effective_viscosity_1d(mu, eta) * grad_u[0];
    return s;
  }
  const double div = grad_u[0] + grad_u[3];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double sym = grad_u[i * 2 + j] + grad_u[j * 2 + i];
      double iso = i == j ? div : 0.0;
      s(i, j) = mu * (sym - (2.0 / dim) * iso) + eta * iso;
    }
  return s;
}

double energy_density(double rho, std::span<const double> momentum, double a, double gamma) {
  if (!(rho > 0.0)) throw AdmissibilityError("energy_density: non-positive density");
  double m2 = 0.0;
  for (double m : momentum) m2 += m * m;
  return 0.5 * m2 / rho + pressure_potential(rho, a, gamma);
}

double total_energy(const FluidState& state, double a, double gamma) {
  const int d = state.momentum.components();
  auto mv = state.momentum.values();
  double s = 0.0;
  for (std::size_t c = 0; c < state.rho.cells(); ++c)
    s += energy_density(state.rho(c), mv.subspan(c * d, d), a, gamma);
  return s * state.grid().cell_volume();
}

} // namespace nsuq
