#include "nsuq/fluid_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace nsuq {

FluidState::FluidState(Field rho_, Field momentum_, double time_)
    : rho(std::move(rho_)), momentum(std::move(momentum_)), time(time_) {
  if (rho.components() != 1) throw ShapeError("FluidState: density must be scalar");
  if (!(momentum.grid() == rho.grid()) || momentum.components() != rho.grid().dim)
    throw ShapeError("FluidState: momentum must be a vector field on the density grid");
}

FluidState FluidState::from_velocity(const Field& rho, const Field& u, double time) {
  if (!(u.grid() == rho.grid()) || u.components() != rho.grid().dim)
    throw ShapeError("FluidState: velocity must be a vector field on the density grid");
  Field m = u;
  for (std::size_t c = 0; c < rho.cells(); ++c)
    for (int k = 0; k < u.components(); ++k) m(c, k) = rho(c) * u(c, k);
  return FluidState(rho, std::move(m), time);
}

Field FluidState::velocity() const {
  Field u = momentum;
  for (std::size_t c = 0; c < rho.cells(); ++c)
    for (int k = 0; k < u.components(); ++k) u(c, k) = momentum(c, k) / rho(c);
  return u;
}

double FluidState::min_density() const {
  auto v = rho.values();
  return *std::min_element(v.begin(), v.end());
}

double FluidState::linf() const {
  double m = 0.0;
  for (std::size_t c = 0; c < rho.cells(); ++c) {
    double speed = momentum.magnitude(c) / std::abs(rho(c));
    m = std::max({m, std::abs(rho(c)), speed});
  }
  return m;
}

void Trajectory::push(FluidState s) {
  if (!states.empty()) {
    if (!(s.grid() == grid)) throw ShapeError("Trajectory: state on a different grid");
    if (!(s.time > times.back())) throw std::invalid_argument("Trajectory: times must increase strictly");
  } else {
    grid = s.grid();
  }
  times.push_back(s.time);
  states.push_back(std::move(s));
}

std::vector<Field> Trajectory::densities() const {
  std::vector<Field> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.rho);
  return out;
}

std::vector<Field> Trajectory::momenta() const {
  std::vector<Field> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.momentum);
  return out;
}

} // namespace nsuq
