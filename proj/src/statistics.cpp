#include "nsuq/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nsuq {

std::string to_string(Quantity q) { return q == Quantity::density ? "density" : "momentum"; }

Quantity quantity_from_string(const std::string& s) {
  if (s == "density") return Quantity::density;
  if (s == "momentum") return Quantity::momentum;
  throw std::invalid_argument("unknown quantity: " + s);
}

double member_linf(const SolveReport& report) { return report.completed() ? report.max_linf() : kInfinity; }

BoundednessReport boundedness_from_maxima(std::span<const double> maxima, std::span<const double> weights,
                                          EnsembleMode mode, std::span<const double> thresholds) {
  if (maxima.empty()) throw std::invalid_argument("boundedness_in_probability: empty ensemble");
  if (mode == EnsembleMode::strong && weights.size() != maxima.size())
    throw std::invalid_argument("boundedness_in_probability: weight count mismatch");
  BoundednessReport rep;
  rep.mode = mode;
  rep.thresholds.assign(thresholds.begin(), thresholds.end());
  const double n = static_cast<double>(maxima.size());
  for (double M : thresholds) {
    double p = 0.0;
    if (mode == EnsembleMode::weak) {
      const auto count = std::count_if(maxima.begin(), maxima.end(), [M](double m) { return m > M; });
      p = static_cast<double>(count) / n;
    } else {
      for (std::size_t i = 0; i < maxima.size(); ++i)
        if (maxima[i] > M) p += weights[i];
    }
    rep.exceedance.push_back(std::clamp(p, 0.0, 1.0));
  }
  for (std::size_t i = 0; i < maxima.size(); ++i)
    if (std::isinf(maxima[i]))
      rep.unresolved_weight += mode == EnsembleMode::weak ? 1.0 / n : weights[i];
  return rep;
}

BoundednessReport boundedness_in_probability(const Ensemble& ensemble, std::span<const double> thresholds) {
  std::vector<double> maxima;
  maxima.reserve(ensemble.size());
  for (const auto& m : ensemble.members) maxima.push_back(member_linf(m.report));
  return boundedness_from_maxima(maxima, ensemble.weights, ensemble.mode, thresholds);
}

namespace {

std::size_t resolve_snapshot(const Trajectory& t, int snapshot) {
  const int n = static_cast<int>(t.size());
  const int j = snapshot < 0 ? n + snapshot : snapshot;
  if (j < 0 || j >= n) throw std::out_of_range("snapshot index out of range");
  return static_cast<std::size_t>(j);
}

const Field& quantity_field(const FluidState& s, Quantity which) {
  return which == Quantity::density ? s.rho : s.momentum;
}

} // namespace

namespace functionals {

TrajectoryFunctional constant(double c) {
  return [c](const Trajectory&) { return c; };
}

TrajectoryFunctional mean_density(int snapshot) {
  return [snapshot](const Trajectory& t) { return t.states[resolve_snapshot(t, snapshot)].rho.mean(); };
}

TrajectoryFunctional fourier_coefficient(Quantity which, int component, std::array<int, 2> k, int part, int snapshot) {
  return [=](const Trajectory& t) {
    const Field& f = quantity_field(t.states[resolve_snapshot(t, snapshot)], which);
    const auto coeff = fourier_coefficients(f, component);
    const auto z = coeff[f.grid().cell(k)];
    return part == 0 ? z.real() : z.imag();
  };
}

TrajectoryFunctional neg_sobolev(Quantity which, int m) {
  return [=](const Trajectory& t) {
    const auto series = which == Quantity::density ? t.densities() : t.momenta();
    return neg_sobolev_norm(series, t.times, m);
  };
}

TrajectoryFunctional tanh_of(TrajectoryFunctional f, double scale) {
  return [f = std::move(f), scale](const Trajectory& t) { return std::tanh(scale * f(t)); };
}

TrajectoryFunctional clamp_of(TrajectoryFunctional f, double lo, double hi) {
  return [f = std::move(f), lo, hi](const Trajectory& t) { return std::clamp(f(t), lo, hi); };
}

TrajectoryFunctional linear_combination(std::vector<std::pair<double, TrajectoryFunctional>> terms) {
  return [terms = std::move(terms)](const Trajectory& t) {
    double s = 0.0;
    for (const auto& [c, f] : terms) s += c * f(t);
    return s;
  };
}

} // namespace functionals

namespace {

MeanResult weighted_mean(const std::vector<double>& values, const std::vector<double>& weights, double unresolved) {
  MeanResult res;
  res.unresolved_weight = unresolved;
  res.resolved_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (values.empty() || !(res.resolved_weight > 0.0)) return res;
  double mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += weights[i] * values[i];
  mean /= res.resolved_weight;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) var += weights[i] * (values[i] - mean) * (values[i] - mean);
  var /= res.resolved_weight;
  res.value = mean;
  res.standard_error = std::sqrt(var / static_cast<double>(values.size()));
  return res;
}

} // namespace

MeanResult empirical_functional_mean(const Ensemble& ensemble, const TrajectoryFunctional& f) {
  std::vector<double> values, weights;
  double unresolved = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& rep = ensemble.members[i].report;
    if (!rep.completed()) {
      unresolved += ensemble.weights[i];
      continue;
    }
    values.push_back(f(rep.trajectory));
    weights.push_back(ensemble.weights[i]);
  }
  return weighted_mean(values, weights, unresolved);
}

MeanResult empirical_data_mean(const Ensemble& ensemble, const DataFunctional& f) {
  std::vector<double> values;
  values.reserve(ensemble.size());
  for (const auto& m : ensemble.members) values.push_back(f(m.data));
  return weighted_mean(values, ensemble.weights, 0.0);
}

namespace {

struct ResolvedSlices {
  std::vector<Field> fields;
  std::vector<double> weights; // renormalised
  double unresolved = 0.0;
};

GridSpec coarsest_grid(const Ensemble& ensemble) {
  const GridSpec* g = nullptr;
  for (const auto& m : ensemble.members)
    if (m.report.completed() && (!g || m.report.trajectory.grid.n < g->n)) g = &m.report.trajectory.grid;
  if (!g) throw std::runtime_error("no completed ensemble members");
  return *g;
}

ResolvedSlices resolved_slices(const Ensemble& ensemble, Quantity which, int snapshot) {
  ResolvedSlices out;
  const GridSpec grid = coarsest_grid(ensemble);
  double mass = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& rep = ensemble.members[i].report;
    if (!rep.completed()) {
      out.unresolved += ensemble.weights[i];
      continue;
    }
    const auto& t = rep.trajectory;
    out.fields.push_back(restrict_or_prolong(quantity_field(t.states[resolve_snapshot(t, snapshot)], which), grid));
    out.weights.push_back(ensemble.weights[i]);
    mass += ensemble.weights[i];
  }
  for (double& w : out.weights) w /= mass;
  return out;
}

} // namespace

FieldSeries empirical_field_mean(const Ensemble& ensemble, Quantity which) {
  if (ensemble.members.empty()) throw std::invalid_argument("empirical_field_mean: empty ensemble");
  const GridSpec grid = coarsest_grid(ensemble);
  const Trajectory* first = nullptr;
  for (const auto& m : ensemble.members)
    if (m.report.completed()) {
      first = &m.report.trajectory;
      break;
    }
  FieldSeries out;
  out.times = first->times;
  const int comps = which == Quantity::density ? 1 : grid.dim;
  out.fields.assign(out.times.size(), Field(grid, comps));
  double mass = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& rep = ensemble.members[i].report;
    if (!rep.completed()) {
      out.unresolved_weight += ensemble.weights[i];
      continue;
    }
    if (rep.trajectory.times.size() != out.times.size())
      throw ShapeError("empirical_field_mean: members have different snapshot times");
    mass += ensemble.weights[i];
  }
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& rep = ensemble.members[i].report;
    if (!rep.completed()) continue;
    const double w = ensemble.weights[i] / mass;
    for (std::size_t j = 0; j < out.times.size(); ++j) {
      if (std::abs(rep.trajectory.times[j] - out.times[j]) > 1e-12 * std::max(1.0, out.times[j]))
        throw ShapeError("empirical_field_mean: members have different snapshot times");
      const Field f = restrict_or_prolong(quantity_field(rep.trajectory.states[j], which), grid);
      out.fields[j] = field_axpy(w, f, out.fields[j]);
    }
  }
  return out;
}

namespace {

/// Objective sum_n w_n S_n^{r/q}, S_n = sum_c vol |Y_nc - Z_c|^q, over flattened fields.
class BarycenterProblem {
public:
  BarycenterProblem(std::span<const Field> samples, std::span<const double> weights, double r, double q)
      : samples_(samples), weights_(weights.begin(), weights.end()), r_(r), q_(q) {
    if (samples.empty()) throw std::invalid_argument("r_barycenter: empty ensemble");
    if (samples.size() != weights.size()) throw std::invalid_argument("r_barycenter: weight count mismatch");
    if (!(r > 1.0)) throw std::domain_error("r_barycenter: r must exceed 1");
    if (!(q >= 1.0) || std::isinf(q)) throw std::domain_error("r_barycenter: q must be finite and >= 1");
    for (const auto& s : samples)
      if (!s.same_layout(samples[0])) throw ShapeError("r_barycenter: samples on different layouts");
    comps_ = samples[0].components();
    cells_ = samples[0].cells();
    vol_ = samples[0].grid().cell_volume();
  }

  Field mean() const {
    Field z(samples_[0].grid(), comps_);
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (std::size_t n = 0; n < samples_.size(); ++n) z = field_axpy(weights_[n] / total, samples_[n], z);
    return z;
  }

  std::vector<double> sums(const Field& z) const {
    std::vector<double> s(samples_.size(), 0.0);
    for (std::size_t n = 0; n < samples_.size(); ++n) {
      double acc = 0.0;
      for (std::size_t c = 0; c < cells_; ++c) acc += std::pow(distance(n, z, c), q_);
      s[n] = acc * vol_;
    }
    return s;
  }

  double objective(const Field& z) const {
    const auto s = sums(z);
    double j = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) j += weights_[n] * std::pow(s[n], r_ / q_);
    return j;
  }

  /// Gradient with respect to the flattened values of z.
  std::vector<double> gradient(const Field& z, const std::vector<double>& s) const {
    std::vector<double> g(z.size(), 0.0);
    for (std::size_t n = 0; n < samples_.size(); ++n) {
      if (!(s[n] > 0.0)) continue;
      const double coef = -r_ * weights_[n] * std::pow(s[n], r_ / q_ - 1.0) * vol_;
      for (std::size_t c = 0; c < cells_; ++c) {
        const double dist = distance(n, z, c);
        if (!(dist > 0.0)) continue;
        const double scale = std::pow(dist, q_ - 2.0);
        for (int k = 0; k < comps_; ++k) g[c * comps_ + k] += coef * scale * (samples_[n](c, k) - z(c, k));
      }
    }
    return g;
  }

  double residual(const std::vector<double>& g) const {
    double m = 0.0;
    for (std::size_t c = 0; c < cells_; ++c) {
      double s = 0.0;
      for (int k = 0; k < comps_; ++k) s += g[c * comps_ + k] * g[c * comps_ + k];
      m = std::max(m, std::sqrt(s));
    }
    return m / vol_;
  }

  /// Hessian-vector product and Hessian diagonal at z (regularised at coincidence points).
  struct Curvature {
    std::vector<std::vector<double>> a; // a_n = |D|^{q-2} D per member
    std::vector<double> rank_coef;      // r (r - q) w S^{r/q-2} vol^2
    std::vector<double> block_coef;     // r w S^{r/q-1} vol
    std::vector<std::vector<double>> dir; // unit D per member
    std::vector<std::vector<double>> mag; // |D|^{q-2} per cell, floored
    std::vector<double> diag;
  };

  Curvature curvature(const Field& z, const std::vector<double>& s) const {
    Curvature cv;
    const std::size_t P = z.size();
    const std::size_t N = samples_.size();
    cv.a.assign(N, std::vector<double>(P, 0.0));
    cv.dir.assign(N, std::vector<double>(P, 0.0));
    cv.mag.assign(N, std::vector<double>(cells_, 0.0));
    cv.rank_coef.assign(N, 0.0);
    cv.block_coef.assign(N, 0.0);
    cv.diag.assign(P, 0.0);
    double scale = 0.0;
    for (std::size_t n = 0; n < N; ++n)
      for (double v : samples_[n].values()) scale = std::max(scale, std::abs(v));
    const double dist_floor = 1e-12 * (1.0 + scale);
    double s_max = 0.0;
    for (double v : s) s_max = std::max(s_max, v);
    const double s_floor = 1e-24 * (1.0 + s_max);
    for (std::size_t n = 0; n < N; ++n) {
      const double sn = std::max(s[n], s_floor);
      cv.rank_coef[n] = r_ * (r_ - q_) * weights_[n] * std::pow(sn, r_ / q_ - 2.0) * vol_ * vol_;
      cv.block_coef[n] = r_ * weights_[n] * std::pow(sn, r_ / q_ - 1.0) * vol_;
      for (std::size_t c = 0; c < cells_; ++c) {
        const double dist = distance(n, z, c);
        const double m = std::pow(std::max(dist, dist_floor), q_ - 2.0);
        cv.mag[n][c] = m;
        for (int k = 0; k < comps_; ++k) {
          const double dk = samples_[n](c, k) - z(c, k);
          cv.a[n][c * comps_ + k] = dist > 0.0 ? std::pow(dist, q_ - 2.0) * dk : 0.0;
          cv.dir[n][c * comps_ + k] = dist > 0.0 ? dk / dist : 0.0;
        }
      }
      for (std::size_t i = 0; i < P; ++i) {
        const std::size_t c = i / comps_;
        const double u = cv.dir[n][i];
        cv.diag[i] += cv.rank_coef[n] * cv.a[n][i] * cv.a[n][i] +
                      cv.block_coef[n] * cv.mag[n][c] * (1.0 + (q_ - 2.0) * u * u);
      }
    }
    return cv;
  }

  std::vector<double> hess_vec(const Curvature& cv, const std::vector<double>& v) const {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t n = 0; n < samples_.size(); ++n) {
      double av = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) av += cv.a[n][i] * v[i];
      for (std::size_t c = 0; c < cells_; ++c) {
        double uv = 0.0;
        for (int k = 0; k < comps_; ++k) uv += cv.dir[n][c * comps_ + k] * v[c * comps_ + k];
        for (int k = 0; k < comps_; ++k) {
          const std::size_t i = c * comps_ + k;
          out[i] += cv.rank_coef[n] * cv.a[n][i] * av +
                    cv.block_coef[n] * cv.mag[n][c] * (v[i] + (q_ - 2.0) * cv.dir[n][i] * uv);
        }
      }
    }
    return out;
  }

private:
  double distance(std::size_t n, const Field& z, std::size_t c) const {
    if (comps_ == 1) return std::abs(samples_[n](c) - z(c));
    double s = 0.0;
    for (int k = 0; k < comps_; ++k) {
      const double d = samples_[n](c, k) - z(c, k);
      s += d * d;
    }
    return std::sqrt(s);
  }

  std::span<const Field> samples_;
  std::vector<double> weights_;
  double r_, q_;
  int comps_ = 1;
  std::size_t cells_ = 0;
  double vol_ = 1.0;
};

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

/// Jacobi-preconditioned CG for H p = -g, truncated on non-positive curvature.
std::vector<double> newton_direction(const BarycenterProblem& prob, const BarycenterProblem::Curvature& cv,
                                     const std::vector<double>& g) {
  const std::size_t P = g.size();
  std::vector<double> x(P, 0.0), r(P), z(P), p(P);
  for (std::size_t i = 0; i < P; ++i) r[i] = -g[i];
  auto precond = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (std::size_t i = 0; i < P; ++i) out[i] = cv.diag[i] > 0.0 ? v[i] / cv.diag[i] : v[i];
  };
  precond(r, z);
  p = z;
  double rz = dot(r, z);
  const double gnorm = std::sqrt(dot(g, g));
  const double tol = std::min(1e-2, std::sqrt(gnorm)) * gnorm;
  const std::size_t max_iter = std::min<std::size_t>(P + 10, 400);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const auto hp = prob.hess_vec(cv, p);
    const double curv = dot(p, hp);
    if (!(curv > 0.0)) {
      if (it == 0) x = z; // preconditioned steepest descent
      break;
    }
    const double alpha = rz / curv;
    for (std::size_t i = 0; i < P; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * hp[i];
    }
    if (std::sqrt(dot(r, r)) <= tol) break;
    precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < P; ++i) p[i] = z[i] + beta * p[i];
  }
  return x;
}

} // namespace

double barycenter_objective(std::span<const Field> samples, std::span<const double> weights, const Field& candidate,
                            double r, double q) {
  return BarycenterProblem(samples, weights, r, q).objective(candidate);
}

double barycenter_residual(std::span<const Field> samples, std::span<const double> weights, const Field& candidate,
                           double r, double q) {
  BarycenterProblem prob(samples, weights, r, q);
  return prob.residual(prob.gradient(candidate, prob.sums(candidate)));
}

BarycenterResult r_barycenter(std::span<const Field> samples, std::span<const double> weights, double r, double q,
                              const BarycenterOptions& options) {
  BarycenterProblem prob(samples, weights, r, q);
  BarycenterResult res;
  res.r = r;
  res.q = q;
  Field z = prob.mean();
  auto s = prob.sums(z);
  auto g = prob.gradient(z, s);
  res.first_order_residual = prob.residual(g);
  if (r == 2.0 && q == 2.0 && !options.force_iterative) {
    res.minimizer = std::move(z);
    res.objective = prob.objective(res.minimizer);
    res.converged = true;
    return res;
  }
  double J = prob.objective(z);
  int it = 0;
  while (res.first_order_residual > options.tolerance && it < options.max_iterations) {
    ++it;
    const auto cv = prob.curvature(z, s);
    auto p = newton_direction(prob, cv, g);
    double slope = dot(g, p);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = -g[i] / (cv.diag[i] > 0.0 ? cv.diag[i] : 1.0);
      slope = dot(g, p);
    }
    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Field trial = z;
      auto tv = trial.values();
      for (std::size_t i = 0; i < p.size(); ++i) tv[i] += t * p[i];
      const auto s_trial = prob.sums(trial);
      double J_trial = 0.0;
      for (std::size_t n = 0; n < s_trial.size(); ++n) J_trial += weights[n] * std::pow(s_trial[n], r / q);
      const auto g_trial = prob.gradient(trial, s_trial);
      const double res_trial = prob.residual(g_trial);
      // near the optimum J changes below roundoff; fall back to residual decrease
      const bool armijo = J_trial <= J + 1e-4 * t * slope;
      const bool flat = J_trial <= J + 1e-14 * std::abs(J) && res_trial < res.first_order_residual;
      if (armijo || flat) {
        z = std::move(trial);
        s = s_trial;
        g = g_trial;
        J = J_trial;
        res.first_order_residual = res_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  res.iterations = it;
  res.minimizer = std::move(z);
  res.objective = J;
  res.converged = res.first_order_residual <= options.tolerance;
  return res;
}

BarycenterResult r_barycenter(const Ensemble& ensemble, Quantity which, double r, double q, int snapshot,
                              const BarycenterOptions& options) {
  const auto slices = resolved_slices(ensemble, which, snapshot);
  auto res = r_barycenter(slices.fields, slices.weights, r, q, options);
  res.unresolved_weight = slices.unresolved;
  return res;
}

std::vector<MemberPair> pair_by_latent(const Ensemble& a, const Ensemble& b) {
  std::vector<MemberPair> pairs;
  pairs.reserve(a.size());
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = std::find_if(b.members.begin(), b.members.end(),
                           [&](const EnsembleMember& m) { return m.latent == a.members[i].latent; });
    if (it == b.members.end())
      throw std::invalid_argument("pair_by_latent: member without a partner at the same latent point");
    pairs.push_back({i, static_cast<std::size_t>(it - b.members.begin()), a.weights[i]});
    total += a.weights[i];
  }
  for (auto& p : pairs) p.weight /= total;
  return pairs;
}

std::vector<MemberPair> pair_by_partition(const CollocationPartition& coarse, const Ensemble& a, const Ensemble& b) {
  if (coarse.size() != a.size()) throw std::invalid_argument("pair_by_partition: partition does not match ensemble");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a.members[i].latent == coarse.points[i]))
      throw std::invalid_argument("pair_by_partition: ensemble members are not the partition's collocation points");
  std::vector<MemberPair> pairs;
  pairs.reserve(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) pairs.push_back({coarse.locate(b.members[j].latent), j, b.weights[j]});
  return pairs;
}

namespace {

double spacetime_distance(const Trajectory& a, const Trajectory& b, double q,
                          const std::function<double(const FluidState&, const FluidState&, std::size_t)>& pointwise,
                          const GridSpec& coarse) {
  if (a.times.size() != b.times.size()) throw ShapeError("distance: snapshot counts differ");
  std::vector<double> samples(a.times.size());
  double sup = 0.0;
  for (std::size_t j = 0; j < a.times.size(); ++j) {
    if (std::abs(a.times[j] - b.times[j]) > 1e-12 * std::max(1.0, std::abs(a.times[j])))
      throw ShapeError("distance: snapshot times differ");
    const FluidState sa(restrict_or_prolong(a.states[j].rho, coarse), restrict_or_prolong(a.states[j].momentum, coarse));
    const FluidState sb(restrict_or_prolong(b.states[j].rho, coarse), restrict_or_prolong(b.states[j].momentum, coarse));
    double s = 0.0;
    for (std::size_t c = 0; c < coarse.cells(); ++c) {
      const double e = pointwise(sa, sb, c);
      if (std::isinf(q)) sup = std::max(sup, e);
      else s += std::pow(e, q);
    }
    samples[j] = s * coarse.cell_volume();
  }
  if (std::isinf(q)) return sup;
  if (a.times.size() == 1) return std::pow(samples[0], 1.0 / q);
  return std::pow(trapezoid(a.times, samples), 1.0 / q);
}

} // namespace

double quantity_distance(const Trajectory& a, const Trajectory& b, Quantity which, double q) {
  if (!(q >= 1.0)) throw std::domain_error("quantity_distance: q must be >= 1");
  const GridSpec& coarse = a.grid.n <= b.grid.n ? a.grid : b.grid;
  return spacetime_distance(
      a, b, q,
      [which](const FluidState& x, const FluidState& y, std::size_t c) {
        if (which == Quantity::density) return std::abs(x.rho(c) - y.rho(c));
        double s = 0.0;
        for (int k = 0; k < x.momentum.components(); ++k) {
          const double d = x.momentum(c, k) - y.momentum(c, k);
          s += d * d;
        }
        return std::sqrt(s);
      },
      coarse);
}

ProbabilityTable convergence_in_probability_diagnostic(const Ensemble& a, const Ensemble& b,
                                                       const std::vector<MemberPair>& pairs,
                                                       std::span<const double> eps, double q) {
  ProbabilityTable table;
  table.eps.assign(eps.begin(), eps.end());
  table.distances.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto& ra = a.members.at(p.a).report;
    const auto& rb = b.members.at(p.b).report;
    table.distances.push_back(ra.completed() && rb.completed() ? trajectory_distance(ra.trajectory, rb.trajectory, q)
                                                               : kInfinity);
  }
  for (double e : eps) {
    double frac = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (table.distances[i] > e) frac += pairs[i].weight;
    table.exceedance.push_back(std::clamp(frac, 0.0, 1.0));
  }
  return table;
}

ProbabilityTable convergence_in_probability_diagnostic(const Ensemble& a, const Ensemble& b,
                                                       std::span<const double> eps, double q) {
  return convergence_in_probability_diagnostic(a, b, pair_by_latent(a, b), eps, q);
}

double expectation_norm_error(const Ensemble& a, const Ensemble& b, const std::vector<MemberPair>& pairs,
                              Quantity which, double q, double r) {
  double s = 0.0;
  for (const auto& p : pairs) {
    const auto& ra = a.members.at(p.a).report;
    const auto& rb = b.members.at(p.b).report;
    if (!ra.completed() || !rb.completed()) return kInfinity;
    s += p.weight * std::pow(quantity_distance(ra.trajectory, rb.trajectory, which, q), r);
  }
  return s;
}

EnergyMoment energy_moment_bound(const Ensemble& ensemble) {
  EnergyMoment out;
  double mass = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& m = ensemble.members[i];
    if (!m.report.completed()) {
      out.unresolved_weight += ensemble.weights[i];
      continue;
    }
    const auto& t = m.report.trajectory;
    if (out.times.empty()) {
      out.times = t.times;
      out.mean_energy.assign(t.times.size(), 0.0);
    } else if (t.times.size() != out.times.size()) {
      throw ShapeError("energy_moment_bound: members have different snapshot times");
    }
    for (std::size_t j = 0; j < t.size(); ++j)
      out.mean_energy[j] += ensemble.weights[i] * total_energy(t.states[j], m.data.a, m.data.gamma);
    mass += ensemble.weights[i];
  }
  if (out.times.empty()) throw std::runtime_error("energy_moment_bound: no completed members");
  for (double& e : out.mean_energy) e /= mass;
  const auto it = std::max_element(out.mean_energy.begin(), out.mean_energy.end());
  out.bound = *it;
  out.time_of_max = out.times[static_cast<std::size_t>(it - out.mean_energy.begin())];
  return out;
}

} // namespace nsuq
