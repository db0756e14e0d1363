#pragma once

#include "nsuq/torus_mesh.hpp"

#include <vector>

namespace nsuq {

/// Discrete (density, momentum) pair. Momentum is the prognostic variable;
/// velocity is recovered as m / rho.
struct FluidState {
  Field rho;
  Field momentum;
  double time = 0.0;

  FluidState() = default;
  FluidState(Field rho_, Field momentum_, double time_ = 0.0);

  static FluidState from_velocity(const Field& rho, const Field& u, double time = 0.0);

  const GridSpec& grid() const { return rho.grid(); }
  Field velocity() const;
  double min_density() const;
  double mass() const { return rho.integral(); }
  /// max over cells of max(|rho|, |u|).
  double linf() const;
};

/// Time history of states on a common grid, sampled at strictly increasing times.
struct Trajectory {
  GridSpec grid;
  std::vector<double> times;
  std::vector<FluidState> states;

  void push(FluidState s);
  bool empty() const { return states.empty(); }
  std::size_t size() const { return states.size(); }
  const FluidState& back() const { return states.back(); }

  std::vector<Field> densities() const;
  std::vector<Field> momenta() const;
};

} // namespace nsuq
