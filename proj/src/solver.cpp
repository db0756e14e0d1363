#include "nsuq/solver.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsuq {

void SchemeConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("SchemeConfig: cfl must lie in (0, 1]");
  if (!(final_time > 0.0)) throw std::invalid_argument("SchemeConfig: final_time must be positive");
  if (!(linf_ceiling > 0.0)) throw std::invalid_argument("SchemeConfig: linf_ceiling must be positive");
  if (!(picard_tol > 0.0)) throw std::invalid_argument("SchemeConfig: picard_tol must be positive");
  if (picard_max_iter < 1) throw std::invalid_argument("SchemeConfig: picard_max_iter must be >= 1");
  if (output_intervals < 1) throw std::invalid_argument("SchemeConfig: output_intervals must be >= 1");
  if (max_steps < 1) throw std::invalid_argument("SchemeConfig: max_steps must be >= 1");
  if (max_dt_halvings < 0) throw std::invalid_argument("SchemeConfig: max_dt_halvings must be >= 0");
}

std::string to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::completed: return "completed";
  case SolveStatus::aborted_linf: return "aborted_linf";
  case SolveStatus::aborted_vacuum: return "aborted_vacuum";
  case SolveStatus::no_convergence: return "no_convergence";
  }
  return "unknown";
}

SolveStatus solve_status_from_string(const std::string& s) {
  for (auto st : {SolveStatus::completed, SolveStatus::aborted_linf, SolveStatus::aborted_vacuum,
                  SolveStatus::no_convergence})
    if (to_string(st) == s) return st;
  throw std::invalid_argument("unknown solve status: " + s);
}

double SolveReport::max_linf() const {
  double m = 0.0;
  for (double v : linf_history) m = std::max(m, v);
  return m;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Discrete operators of the implicit scheme for one data record.
class Scheme {
public:
  Scheme(const DataRecord& data, const SchemeConfig& cfg)
      : data_(data), cfg_(cfg), grid_(data.grid()), d_(grid_.dim), cells_(grid_.cells()), h_(grid_.dx()) {
    kappa_ = cfg.density_diffusion_exponent < 0.0 ? 0.0 : std::pow(h_, cfg.density_diffusion_exponent);
    plus_.resize(cells_ * d_);
    minus_.resize(cells_ * d_);
    for (std::size_t c = 0; c < cells_; ++c)
      for (int a = 0; a < d_; ++a) {
        plus_[c * d_ + a] = grid_.neighbour(c, a, +1);
        minus_[c * d_ + a] = grid_.neighbour(c, a, -1);
      }
  }

  std::size_t plus(std::size_t c, int a) const { return plus_[c * d_ + a]; }
  std::size_t minus(std::size_t c, int a) const { return minus_[c * d_ + a]; }

  /// Mass flux coefficients on face (c, c + e_a): F = alpha rho_L + beta rho_R.
  void flux_coefficients(double v, double& alpha, double& beta) const {
    if (v > 0.0) {
      alpha = v;
      beta = 0.0;
    } else if (v < 0.0) {
      alpha = 0.0;
      beta = v;
    } else {
      // zero face velocity: central average (contributes nothing)
      alpha = 0.5 * v;
      beta = 0.5 * v;
    }
    alpha += kappa_;
    beta -= kappa_;
  }

  std::vector<double> face_velocities(const Field& u) const {
    std::vector<double> v(cells_ * d_);
    for (std::size_t c = 0; c < cells_; ++c)
      for (int a = 0; a < d_; ++a) v[c * d_ + a] = 0.5 * (u(c, a) + u(plus(c, a), a));
    return v;
  }

  std::vector<double> mass_fluxes(const Field& rho, const std::vector<double>& v) const {
    std::vector<double> f(cells_ * d_);
    for (std::size_t c = 0; c < cells_; ++c)
      for (int a = 0; a < d_; ++a) {
        double alpha, beta;
        flux_coefficients(v[c * d_ + a], alpha, beta);
        f[c * d_ + a] = alpha * rho(c) + beta * rho(plus(c, a));
      }
    return f;
  }

  std::vector<double> forcing(double t) const {
    std::vector<double> g(cells_ * d_, 0.0);
    if (data_.g.is_zero()) return g;
    for (std::size_t c = 0; c < cells_; ++c)
      data_.g.evaluate(t, grid_.center(c), grid_.period, std::span<double>(g).subspan(c * d_, d_));
    return g;
  }

  Field pressure_field(const Field& rho) const {
    Field p = Field::scalar(grid_);
    for (std::size_t c = 0; c < cells_; ++c) p(c) = pressure(rho(c), data_.a, data_.gamma);
    return p;
  }

  double pressure_gradient(const Field& p, std::size_t c, int k) const {
    return (p(plus(c, k)) - p(minus(c, k))) / (2.0 * h_);
  }

  /// Viscous operator (div S)_k at cell c as a list of (cell, component, weight) entries.
  template <class Emit>
  void viscous_stencil(std::size_t c, int k, Emit&& emit) const {
    const double h2 = h_ * h_;
    if (d_ == 1) {
      const double nu = effective_viscosity_1d(data_.mu, data_.eta);
      emit(plus(c, 0), 0, nu / h2);
      emit(minus(c, 0), 0, nu / h2);
      emit(c, 0, -2.0 * nu / h2);
      return;
    }
    for (int a = 0; a < d_; ++a) {
      emit(plus(c, a), k, data_.mu / h2);
      emit(minus(c, a), k, data_.mu / h2);
      emit(c, k, -2.0 * data_.mu / h2);
    }
    // grad-div through the centred divergence and its negative adjoint
    const double bulk = data_.mu * (1.0 - 2.0 / d_) + data_.eta;
    if (bulk == 0.0) return;
    const double w = bulk / (4.0 * h2);
    const std::size_t cp = plus(c, k), cm = minus(c, k);
    for (int a = 0; a < d_; ++a) {
      emit(plus(cp, a), a, w);
      emit(minus(cp, a), a, -w);
      emit(plus(cm, a), a, -w);
      emit(minus(cm, a), a, w);
    }
  }

  double viscous(const Field& u, std::size_t c, int k) const {
    double s = 0.0;
    viscous_stencil(c, k, [&](std::size_t cell, int comp, double w) { s += w * u(cell, comp); });
    return s;
  }

  double residual(const FluidState& s0, const FluidState& s1, double dt) const {
    const Field u1 = s1.velocity();
    const auto v = face_velocities(u1);
    const auto f = mass_fluxes(s1.rho, v);
    const auto g = forcing(s0.time + dt);
    const bool implicit = cfg_.theta_implicit;
    const Field p = pressure_field(implicit ? s1.rho : s0.rho);
    const Field u0 = implicit ? Field() : s0.velocity();
    const Field& uv = implicit ? u1 : u0;
    double r = 0.0;
    for (std::size_t c = 0; c < cells_; ++c) {
      double div = 0.0;
      for (int a = 0; a < d_; ++a) div += f[c * d_ + a] - f[minus(c, a) * d_ + a];
      r = std::max(r, std::abs(s1.rho(c) - s0.rho(c) + dt * div / h_));
      for (int k = 0; k < d_; ++k) {
        double conv = 0.0;
        for (int a = 0; a < d_; ++a) {
          conv += momentum_flux(f[c * d_ + a], u1(c, k), u1(plus(c, a), k));
          const std::size_t cm = minus(c, a);
          conv -= momentum_flux(f[cm * d_ + a], u1(cm, k), u1(c, k));
        }
        double rhs = -pressure_gradient(p, c, k) + viscous(uv, c, k) + s1.rho(c) * g[c * d_ + k];
        double rm = s1.momentum(c, k) - s0.momentum(c, k) + dt * (conv / h_ - rhs);
        r = std::max(r, std::abs(rm));
      }
    }
    return r;
  }

  static double momentum_flux(double f, double u_left, double u_right) {
    return std::max(f, 0.0) * u_left - std::max(-f, 0.0) * u_right;
  }

  StepOutcome advance(const FluidState& s0, double dt) const {
    StepOutcome out;
    out.state = s0;
    if (!(s0.min_density() > 0.0)) {
      out.status = SolveStatus::aborted_vacuum;
      return out;
    }
    const double t1 = s0.time + dt;
    const auto g = forcing(t1);
    const Field u_old = s0.velocity();
    const bool implicit = cfg_.theta_implicit;
    const Field p_old = implicit ? Field() : pressure_field(s0.rho);

    Field u = u_old;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> mass_lu, mom_lu;
    std::vector<Triplet> trip;
    const std::size_t nm = cells_ * d_;

    for (int it = 1; it <= cfg_.picard_max_iter; ++it) {
      // mass: (rho - rho0)/dt + div F(rho; v) = 0, linear in rho for frozen v
      const auto v = face_velocities(u);
      trip.clear();
      trip.reserve(cells_ * (1 + 4 * d_));
      for (std::size_t c = 0; c < cells_; ++c) trip.emplace_back(c, c, 1.0 / dt);
      for (std::size_t c = 0; c < cells_; ++c)
        for (int a = 0; a < d_; ++a) {
          double alpha, beta;
          flux_coefficients(v[c * d_ + a], alpha, beta);
          const std::size_t r = plus(c, a);
          trip.emplace_back(c, c, alpha / h_);
          trip.emplace_back(c, r, beta / h_);
          trip.emplace_back(r, c, -alpha / h_);
          trip.emplace_back(r, r, -beta / h_);
        }
      SpMat A(cells_, cells_);
      A.setFromTriplets(trip.begin(), trip.end());
      Eigen::VectorXd b(cells_);
      for (std::size_t c = 0; c < cells_; ++c) b[c] = s0.rho(c) / dt;
      mass_lu.compute(A);
      if (mass_lu.info() != Eigen::Success) {
        out.status = SolveStatus::no_convergence;
        return out;
      }
      Eigen::VectorXd rho_vec = mass_lu.solve(b);
      Field rho = Field::scalar(grid_);
      for (std::size_t c = 0; c < cells_; ++c) rho(c) = rho_vec[c];
      if (!rho.all_finite()) {
        out.status = SolveStatus::no_convergence;
        return out;
      }
      if (!(*std::min_element(rho.values().begin(), rho.values().end()) > 0.0)) {
        out.status = SolveStatus::aborted_vacuum;
        return out;
      }

      // momentum: (rho u - m0)/dt + div(F u_up) + grad p = div S(u) + rho g, linear in u
      const auto f = mass_fluxes(rho, v);
      const Field p = implicit ? pressure_field(rho) : p_old;
      trip.clear();
      trip.reserve(nm * (1 + 4 * d_ + (d_ == 1 ? 3 : 2 * d_ + 4 * d_ + 1)));
      for (std::size_t c = 0; c < cells_; ++c)
        for (int k = 0; k < d_; ++k) trip.emplace_back(c * d_ + k, c * d_ + k, rho(c) / dt);
      for (std::size_t c = 0; c < cells_; ++c)
        for (int a = 0; a < d_; ++a) {
          const double fp = std::max(f[c * d_ + a], 0.0) / h_;
          const double fm = std::max(-f[c * d_ + a], 0.0) / h_;
          const std::size_t r = plus(c, a);
          for (int k = 0; k < d_; ++k) {
            trip.emplace_back(c * d_ + k, c * d_ + k, fp);
            trip.emplace_back(c * d_ + k, r * d_ + k, -fm);
            trip.emplace_back(r * d_ + k, c * d_ + k, -fp);
            trip.emplace_back(r * d_ + k, r * d_ + k, fm);
          }
        }
      if (implicit) {
        for (std::size_t c = 0; c < cells_; ++c)
          for (int k = 0; k < d_; ++k)
            viscous_stencil(c, k, [&](std::size_t cell, int comp, double w) {
              trip.emplace_back(c * d_ + k, cell * d_ + comp, -w);
            });
      }
      SpMat M(nm, nm);
      M.setFromTriplets(trip.begin(), trip.end());
      Eigen::VectorXd rhs(nm);
      for (std::size_t c = 0; c < cells_; ++c)
        for (int k = 0; k < d_; ++k) {
          double val = s0.momentum(c, k) / dt - pressure_gradient(p, c, k) + rho(c) * g[c * d_ + k];
          if (!implicit) val += viscous(u_old, c, k);
          rhs[c * d_ + k] = val;
        }
      mom_lu.compute(M);
      if (mom_lu.info() != Eigen::Success) {
        out.status = SolveStatus::no_convergence;
        return out;
      }
      Eigen::VectorXd u_vec = mom_lu.solve(rhs);
      Field u_new = Field::vector(grid_);
      for (std::size_t i = 0; i < nm; ++i) u_new.values()[i] = u_vec[i];
      if (!u_new.all_finite()) {
        out.status = SolveStatus::no_convergence;
        return out;
      }

      FluidState candidate = FluidState::from_velocity(rho, u_new, t1);
      const double r = residual(s0, candidate, dt);
      out.iterations = it;
      out.residual = r;
      if (r <= cfg_.picard_tol) {
        out.state = std::move(candidate);
        out.status = SolveStatus::completed;
        return out;
      }
      u = std::move(u_new);
    }
    out.status = SolveStatus::no_convergence;
    return out;
  }

private:
  const DataRecord& data_;
  const SchemeConfig& cfg_;
  GridSpec grid_;
  int d_;
  std::size_t cells_;
  double h_;
  double kappa_ = 0.0;
  std::vector<std::size_t> plus_, minus_;
};

} // namespace

StepOutcome step(const FluidState& state, const DataRecord& data, double dt, const SchemeConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (!(state.grid() == data.grid())) throw ShapeError("step: state and data grids differ");
  return Scheme(data, cfg).advance(state, dt);
}

double scheme_residual(const DataRecord& data, const FluidState& before, const FluidState& after, double dt,
                       const SchemeConfig& cfg) {
  if (!(before.grid() == after.grid()) || !(before.grid() == data.grid()))
    throw ShapeError("scheme_residual: states on different grids");
  return Scheme(data, cfg).residual(before, after, dt);
}

double cfl_dt(const FluidState& state, const DataRecord& data, const SchemeConfig& cfg) {
  const auto& grid = state.grid();
  const double h = grid.dx();
  double umax = 0.0, cmax = 0.0, rho_min = kInfinity;
  for (std::size_t c = 0; c < state.rho.cells(); ++c) {
    const double rho = state.rho(c);
    if (!(rho > 0.0)) throw AdmissibilityError("cfl_dt: non-positive density");
    umax = std::max(umax, state.momentum.magnitude(c) / rho);
    cmax = std::max(cmax, sound_speed(rho, data.a, data.gamma));
    rho_min = std::min(rho_min, rho);
  }
  const double convective = h / (umax + cmax);
  const double visc = 2.0 * data.mu + data.eta;
  const double diffusive = visc > 0.0 ? h * h * rho_min / (2.0 * grid.dim * visc) : kInfinity;
  return cfg.cfl * std::min(convective, diffusive);
}

SolveReport solve(const DataRecord& data, const SchemeConfig& cfg) {
  cfg.validate();
  SolveReport rep;
  FluidState state = data.initial_state();
  if (!(state.min_density() > 0.0)) {
    rep.status = SolveStatus::aborted_vacuum;
    return rep;
  }
  const Scheme scheme(data, cfg);
  auto record = [&](const FluidState& s) {
    rep.step_times.push_back(s.time);
    rep.linf_history.push_back(s.linf());
    rep.energy_history.push_back(total_energy(s, data.a, data.gamma));
  };
  record(state);
  rep.trajectory.push(state);
  if (rep.linf_history.back() > cfg.linf_ceiling) {
    rep.status = SolveStatus::aborted_linf;
    return rep;
  }

  const double T = cfg.final_time;
  int next_output = 1;
  auto output_time = [&](int j) { return j == cfg.output_intervals ? T : T * j / cfg.output_intervals; };

  while (next_output <= cfg.output_intervals) {
    if (rep.steps >= cfg.max_steps) {
      rep.status = SolveStatus::no_convergence;
      return rep;
    }
    const double target = output_time(next_output);
    double dt = cfl_dt(state, data, cfg);
    bool hits_output = false;
    if (state.time + dt >= target - 1e-12 * T) {
      dt = target - state.time;
      hits_output = true;
    }
    StepOutcome out = scheme.advance(state, dt);
    for (int halving = 0; out.status == SolveStatus::no_convergence && halving < cfg.max_dt_halvings; ++halving) {
      dt *= 0.5;
      hits_output = false;
      out = scheme.advance(state, dt);
    }
    rep.picard_iterations += out.iterations;
    if (!out.ok()) {
      rep.status = out.status;
      return rep;
    }
    rep.max_step_residual = std::max(rep.max_step_residual, out.residual);
    state = std::move(out.state);
    if (hits_output) state.time = target;
    ++rep.steps;
    record(state);
    if (hits_output) {
      rep.trajectory.push(state);
      ++next_output;
    }
    if (rep.linf_history.back() > cfg.linf_ceiling) {
      rep.status = SolveStatus::aborted_linf;
      return rep;
    }
  }
  rep.status = SolveStatus::completed;
  return rep;
}

double energy_gronwall_bound(double initial_energy, double mass, double g_sup, double horizon) {
  const double root = std::sqrt(initial_energy) + horizon * g_sup * std::sqrt(2.0 * mass);
  return root * root;
}

ExactProblem manufactured_wave_problem(double amp, double flux_offset, double mu, double eta, double a,
                                       double gamma, double horizon) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  struct Wave {
    double amp, c, nu, a, gamma;
    // rho, rho_x, rho_xx at (t, x)
    void density(double t, double x, double& r, double& rx, double& rxx) const {
      const double ph = two_pi * (x - t);
      r = 1.0 + amp * std::sin(ph);
      rx = two_pi * amp * std::cos(ph);
      rxx = -two_pi * two_pi * amp * std::sin(ph);
    }
    // body force per unit mass that makes (rho, rho + c) an exact solution
    double force(double t, double x) const {
      double r, rx, rxx;
      density(t, x, r, rx, rxx);
      // m_t + (m u)_x = -rho_x + rho_x - c^2 rho_x / rho^2
      const double inertia = -c * c * rx / (r * r);
      const double px = a * gamma * std::pow(r, gamma - 1.0) * rx;
      // u = 1 + c / rho  =>  u_xx = -c (rho_xx / rho^2 - 2 rho_x^2 / rho^3)
      const double uxx = -c * (rxx / (r * r) - 2.0 * rx * rx / (r * r * r));
      return (inertia + px - nu * uxx) / r;
    }
  };
  const Wave wave{amp, flux_offset, effective_viscosity_1d(mu, eta), a, gamma};

  // sup of the forcing from a dense space-time sample, with a 5% margin
  double sup = 0.0;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 100; ++j) sup = std::max(sup, std::abs(wave.force(horizon * j / 100.0, i / 400.0)));
  sup *= 1.05;

  ExactProblem problem;
  problem.make_data = [=](const GridSpec& grid) {
    if (grid.dim != 1 || grid.period != 1.0)
      throw std::invalid_argument("manufactured_wave_problem: needs the 1-D unit torus");
    DataRecord data;
    data.rho0 = Field::scalar(grid);
    data.u0 = Field::vector(grid);
    for (std::size_t c = 0; c < grid.cells(); ++c) {
      double r, rx, rxx;
      wave.density(0.0, grid.center(c)[0], r, rx, rxx);
      data.rho0(c) = r;
      data.u0(c, 0) = 1.0 + flux_offset / r;
    }
    data.mu = mu;
    data.eta = eta;
    data.a = a;
    data.gamma = gamma;
    data.g.modes.clear();
    data.g.horizon = horizon;
    data.g.extra = [wave](double t, std::array<double, 2> x, std::span<double> out) { out[0] += wave.force(t, x[0]); };
    data.g.extra_sup = sup;
    return data;
  };
  problem.exact = [wave, flux_offset](double t, std::array<double, 2> x, double& rho, std::span<double> m) {
    double rx, rxx;
    wave.density(t, x[0], rho, rx, rxx);
    m[0] = rho + flux_offset;
  };
  return problem;
}

ExactProblem equilibrium_problem(int dim, double rho, double mu, double a, double gamma) {
  ExactProblem problem;
  problem.make_data = [=](const GridSpec& grid) {
    if (grid.dim != dim) throw std::invalid_argument("equilibrium_problem: dimension mismatch");
    DataRecord data;
    data.rho0 = Field::scalar(grid, rho);
    data.u0 = Field::vector(grid, 0.0);
    data.mu = mu;
    data.eta = 0.0;
    data.a = a;
    data.gamma = gamma;
    return data;
  };
  problem.exact = [rho](double, std::array<double, 2>, double& r, std::span<double> m) {
    r = rho;
    for (double& v : m) v = 0.0;
  };
  return problem;
}

namespace {

void fill_orders(std::vector<ConvergenceRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].error, cur = rows[i].error;
    rows[i].order = (prev > 0.0 && cur > 0.0) ? std::log(prev / cur) / std::log(rows[i - 1].h / rows[i].h) : 0.0;
  }
}

} // namespace

std::vector<ConvergenceRow> manufactured_convergence(const ExactProblem& problem, const std::vector<GridSpec>& grids,
                                                     const SchemeConfig& cfg) {
  std::vector<ConvergenceRow> rows;
  for (const auto& grid : grids) {
    const DataRecord data = problem.make_data(grid);
    const SolveReport rep = solve(data, cfg);
    ConvergenceRow row;
    row.n = grid.n;
    row.h = grid.dx();
    row.status = rep.status;
    const auto& traj = rep.trajectory;
    std::vector<double> er(traj.size()), em(traj.size());
    std::vector<double> m(grid.dim);
    for (std::size_t j = 0; j < traj.size(); ++j) {
      const auto& s = traj.states[j];
      double sr = 0.0, sm = 0.0;
      for (std::size_t c = 0; c < grid.cells(); ++c) {
        double rho;
        problem.exact(traj.times[j], grid.center(c), rho, m);
        sr += std::abs(s.rho(c) - rho);
        double dm = 0.0;
        for (int k = 0; k < grid.dim; ++k) dm += (s.momentum(c, k) - m[k]) * (s.momentum(c, k) - m[k]);
        sm += std::sqrt(dm);
      }
      er[j] = sr * grid.cell_volume();
      em[j] = sm * grid.cell_volume();
    }
    row.density_error = trapezoid(traj.times, er);
    row.momentum_error = trapezoid(traj.times, em);
    row.error = row.density_error + row.momentum_error;
    rows.push_back(row);
  }
  fill_orders(rows);
  return rows;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b, double q) {
  if (!(q >= 1.0)) throw std::domain_error("trajectory_distance: q must be >= 1");
  if (a.times.size() != b.times.size()) throw ShapeError("trajectory_distance: snapshot counts differ");
  for (std::size_t j = 0; j < a.times.size(); ++j)
    if (std::abs(a.times[j] - b.times[j]) > 1e-12 * std::max(1.0, std::abs(a.times[j])))
      throw ShapeError("trajectory_distance: snapshot times differ");
  const GridSpec& coarse = a.grid.n <= b.grid.n ? a.grid : b.grid;
  const int d = coarse.dim;
  std::vector<double> samples(a.times.size());
  double sup = 0.0;
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    const Field ra = restrict_or_prolong(a.states[j].rho, coarse), rb = restrict_or_prolong(b.states[j].rho, coarse);
    const Field ma = restrict_or_prolong(a.states[j].momentum, coarse),
                mb = restrict_or_prolong(b.states[j].momentum, coarse);
    double s = 0.0;
    for (std::size_t c = 0; c < coarse.cells(); ++c) {
      double e2 = (ra(c) - rb(c)) * (ra(c) - rb(c));
      for (int k = 0; k < d; ++k) e2 += (ma(c, k) - mb(c, k)) * (ma(c, k) - mb(c, k));
      const double e = std::sqrt(e2);
      if (std::isinf(q)) sup = std::max(sup, e);
      else s += std::pow(e, q);
    }
    samples[j] = s * coarse.cell_volume();
  }
  if (std::isinf(q)) return sup;
  if (a.times.size() == 1) return std::pow(samples[0], 1.0 / q);
  return std::pow(trapezoid(a.times, samples), 1.0 / q);
}

std::vector<ConvergenceRow> self_convergence(const std::function<DataRecord(const GridSpec&)>& make_data,
                                             const std::vector<GridSpec>& grids, const GridSpec& reference,
                                             const SchemeConfig& cfg) {
  const SolveReport ref = solve(make_data(reference), cfg);
  if (!ref.completed()) throw std::runtime_error("self_convergence: reference solve did not complete");
  std::vector<ConvergenceRow> rows;
  for (const auto& grid : grids) {
    const SolveReport rep = solve(make_data(grid), cfg);
    ConvergenceRow row;
    row.n = grid.n;
    row.h = grid.dx();
    row.status = rep.status;
    if (rep.completed()) {
      const auto& traj = rep.trajectory;
      std::vector<double> er(traj.size()), em(traj.size());
      for (std::size_t j = 0; j < traj.size(); ++j) {
        const Field r = restrict_or_prolong(ref.trajectory.states[j].rho, grid);
        const Field m = restrict_or_prolong(ref.trajectory.states[j].momentum, grid);
        er[j] = lq_norm(field_sub(traj.states[j].rho, r), 1.0);
        em[j] = lq_norm(field_sub(traj.states[j].momentum, m), 1.0);
      }
      row.density_error = trapezoid(traj.times, er);
      row.momentum_error = trapezoid(traj.times, em);
      row.error = row.density_error + row.momentum_error;
    } else {
      row.error = kInfinity;
    }
    rows.push_back(row);
  }
  fill_orders(rows);
  return rows;
}

} // namespace nsuq
