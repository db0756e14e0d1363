#include "nsuq/random_data.hpp"

#include "nsuq/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nsuq {

namespace {

double coordinate(const LatentPoint& omega, int coord) {
  if (coord < 0 || coord >= static_cast<int>(omega.coords.size()))
    throw std::out_of_range("latent coordinate index out of range");
  return omega.coords[coord];
}

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

} // namespace

ParameterTransform ParameterTransform::constant_value(double v) {
  ParameterTransform t;
  t.kind = Kind::constant;
  t.value = v;
  t.lo = t.hi = v;
  return t;
}

ParameterTransform ParameterTransform::uniform(int coord, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("uniform transform: need lo <= hi");
  ParameterTransform t;
  t.kind = Kind::uniform;
  t.coord = coord;
  t.lo = lo;
  t.hi = hi;
  return t;
}

ParameterTransform ParameterTransform::truncated_normal(int coord, double lo, double hi, double mean, double sd) {
  if (!(lo < hi) || !(sd > 0.0)) throw std::invalid_argument("truncated normal transform: need lo < hi, sd > 0");
  ParameterTransform t;
  t.kind = Kind::truncated_normal;
  t.coord = coord;
  t.lo = lo;
  t.hi = hi;
  t.mean = mean;
  t.sd = sd;
  return t;
}

double ParameterTransform::operator()(const LatentPoint& omega) const {
  switch (kind) {
  case Kind::constant: return value;
  case Kind::uniform: return lo + (hi - lo) * coordinate(omega, coord);
  case Kind::truncated_normal: {
    const double w = coordinate(omega, coord);
    const double ca = boost::math::cdf(kStdNormal, (lo - mean) / sd);
    const double cb = boost::math::cdf(kStdNormal, (hi - mean) / sd);
    const double p = ca + w * (cb - ca);
    if (p <= 0.0) return lo;
    if (p >= 1.0) return hi;
    return std::clamp(mean + sd * boost::math::quantile(kStdNormal, p), lo, hi);
  }
  }
  return value;
}

double ParameterTransform::min_value() const { return kind == Kind::constant ? value : lo; }
double ParameterTransform::max_value() const { return kind == Kind::constant ? value : hi; }

double ParameterTransform::lipschitz() const {
  switch (kind) {
  case Kind::constant: return 0.0;
  case Kind::uniform: return hi - lo;
  case Kind::truncated_normal: {
    const double za = (lo - mean) / sd, zb = (hi - mean) / sd;
    const double mass = boost::math::cdf(kStdNormal, zb) - boost::math::cdf(kStdNormal, za);
    // the density is unimodal, so its minimum over [za, zb] sits at an endpoint
    const double pdf_min = std::min(boost::math::pdf(kStdNormal, za), boost::math::pdf(kStdNormal, zb));
    return sd * mass / pdf_min;
  }
  }
  return 0.0;
}

double RandomMode::cos_amp(const LatentPoint& omega) const {
  return coord < 0 ? cos_base : cos_base + cos_slope * coordinate(omega, coord);
}

double RandomMode::sin_amp(const LatentPoint& omega) const {
  return coord < 0 ? sin_base : sin_base + sin_slope * coordinate(omega, coord);
}

double RandomMode::max_amplitude() const {
  // the amplitude is a convex function of the coordinate: its max is at 0 or 1
  const double at0 = std::hypot(cos_base, sin_base);
  if (coord < 0) return at0;
  return std::max(at0, std::hypot(cos_base + cos_slope, sin_base + sin_slope));
}

namespace {

double mode_phase(const std::array<int, 2>& k, const std::array<double, 2>& x, int dim, double period) {
  double ph = 0.0;
  for (int a = 0; a < dim; ++a) ph += k[a] * x[a];
  return 2.0 * std::numbers::pi * ph / period;
}

double mode_wavenumber_squared(const std::array<int, 2>& k, int dim, double period) {
  double w = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double ka = 2.0 * std::numbers::pi * k[a] / period;
    w += ka * ka;
  }
  return w;
}

bool is_zero_mode(const std::array<int, 2>& k, int dim) {
  for (int a = 0; a < dim; ++a)
    if (k[a] != 0) return false;
  return true;
}

/// H^s norm of c cos(k.x) + s sin(k.x) on the continuous torus.
double mode_norm(const std::array<int, 2>& k, double c, double s, int dim, double period, double order) {
  const double vol = std::pow(period, dim);
  const double weight = std::pow(1.0 + mode_wavenumber_squared(k, dim, period), order);
  if (is_zero_mode(k, dim)) return std::sqrt(vol * weight) * std::abs(c);
  return std::sqrt(vol * weight * 0.5 * (c * c + s * s));
}

double envelope_sup(const std::vector<double>& envelope, double horizon) {
  double env = 0.0;
  for (std::size_t j = 0; j < envelope.size(); ++j) env += std::abs(envelope[j]) * std::pow(horizon, static_cast<double>(j));
  return env;
}

void check_modes(const std::vector<RandomMode>& modes, int components, int K, const char* what) {
  for (const auto& m : modes) {
    if (m.component < 0 || m.component >= components)
      throw std::invalid_argument(std::string(what) + ": mode component out of range");
    if (m.coord >= K) throw std::invalid_argument(std::string(what) + ": mode latent coordinate out of range");
  }
}

void check_transform(const ParameterTransform& t, int K, const char* what) {
  if (t.kind != ParameterTransform::Kind::constant && (t.coord < 0 || t.coord >= K))
    throw std::invalid_argument(std::string(what) + ": latent coordinate out of range");
}

} // namespace

void DistributionSpec::validate() const {
  if (K < 1) throw std::invalid_argument("DistributionSpec: K must be >= 1");
  if (dim < 1 || dim > 2) throw std::invalid_argument("DistributionSpec: dim must be 1 or 2");
  if (!(period > 0.0)) throw std::invalid_argument("DistributionSpec: period must be positive");
  if (!(gamma > 1.0)) throw std::invalid_argument("DistributionSpec: gamma must exceed 1");
  bounds.validate();
  check_transform(mu, K, "mu");
  check_transform(eta, K, "eta");
  check_transform(a, K, "a");
  if (rho0.mean.size() != 1) throw std::invalid_argument("DistributionSpec: rho0 needs one mean value");
  if (static_cast<int>(u0.mean.size()) != dim) throw std::invalid_argument("DistributionSpec: u0 needs dim mean values");
  check_modes(rho0.modes, 1, K, "rho0");
  check_modes(u0.modes, dim, K, "u0");
  check_modes(g.modes, dim, K, "g");

  if (mu.min_value() < bounds.mu_lower) throw std::invalid_argument("DistributionSpec: mu can fall below mu_lower");
  if (eta.min_value() < 0.0) throw std::invalid_argument("DistributionSpec: eta can be negative");
  if (a.min_value() < bounds.a_lower || a.max_value() > bounds.a_upper)
    throw std::invalid_argument("DistributionSpec: a can leave [a_lower, a_upper]");
  double rho_swing = 0.0;
  for (const auto& m : rho0.modes) rho_swing += m.max_amplitude();
  if (rho0.mean[0] - rho_swing < bounds.rho_lower)
    throw std::invalid_argument("DistributionSpec: rho0 can fall below rho_lower");
  std::array<double, 2> amp{0.0, 0.0};
  for (const auto& m : g.modes) amp[m.component] += m.max_amplitude();
  double gsup = 0.0;
  for (int c = 0; c < dim; ++c) gsup += amp[c] * amp[c];
  gsup = envelope_sup(g.envelope, g.horizon) * std::sqrt(gsup);
  if (gsup > bounds.g_sup) throw std::invalid_argument("DistributionSpec: forcing can exceed g_sup");
}

double DistributionSpec::lipschitz() const {
  double L = mu.lipschitz() + eta.lipschitz() + a.lipschitz();
  auto field_part = [&](const std::vector<RandomMode>& modes) {
    double s = 0.0;
    for (const auto& m : modes)
      if (m.coord >= 0) s += mode_norm(m.k, m.cos_slope, m.sin_slope, dim, period, sobolev_order);
    return s;
  };
  L += field_part(rho0.modes) + field_part(u0.modes);
  L += envelope_sup(g.envelope, g.horizon) * field_part(g.modes);
  return L;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

} // namespace

LatentPoint latent_point(std::uint64_t seed, std::uint64_t index, int K) {
  LatentPoint p;
  p.coords.resize(K);
  const std::uint64_t base = splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ull));
  for (int k = 0; k < K; ++k) {
    const std::uint64_t bits = splitmix64(base + static_cast<std::uint64_t>(k) * 0x9E3779B97F4A7C15ull);
    p.coords[k] = static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
  return p;
}

std::vector<LatentPoint> sample_latent(std::uint64_t seed, std::size_t count, int K) {
  if (count < 1) throw std::invalid_argument("sample_latent: count must be >= 1");
  std::vector<LatentPoint> pts;
  pts.reserve(count);
  for (std::size_t n = 0; n < count; ++n) pts.push_back(latent_point(seed, n, K));
  return pts;
}

DataRecord realize_data(const DistributionSpec& spec, const LatentPoint& omega, const GridSpec& grid) {
  if (static_cast<int>(omega.dim()) != spec.K) throw std::invalid_argument("realize_data: latent dimension mismatch");
  for (double w : omega.coords)
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("realize_data: latent point outside the unit cube");
  if (grid.dim != spec.dim || grid.period != spec.period)
    throw std::invalid_argument("realize_data: grid does not match the distribution");
  auto check_resolved = [&](const std::vector<RandomMode>& modes) {
    for (const auto& m : modes)
      for (int a = 0; a < grid.dim; ++a)
        if (2 * std::abs(m.k[a]) >= grid.n) throw std::invalid_argument("realize_data: mode not resolved by grid");
  };
  check_resolved(spec.rho0.modes);
  check_resolved(spec.u0.modes);

  DataRecord data;
  data.rho0 = Field::scalar(grid, spec.rho0.mean[0]);
  data.u0 = Field::vector(grid);
  for (std::size_t c = 0; c < grid.cells(); ++c) {
    const auto x = grid.center(c);
    for (const auto& m : spec.rho0.modes) {
      const double ph = mode_phase(m.k, x, grid.dim, grid.period);
      data.rho0(c) += m.cos_amp(omega) * std::cos(ph) + m.sin_amp(omega) * std::sin(ph);
    }
    for (int k = 0; k < grid.dim; ++k) data.u0(c, k) = spec.u0.mean[k];
    for (const auto& m : spec.u0.modes) {
      const double ph = mode_phase(m.k, x, grid.dim, grid.period);
      data.u0(c, m.component) += m.cos_amp(omega) * std::cos(ph) + m.sin_amp(omega) * std::sin(ph);
    }
  }
  data.mu = spec.mu(omega);
  data.eta = spec.eta(omega);
  data.a = spec.a(omega);
  data.gamma = spec.gamma;
  data.g.envelope = spec.g.envelope;
  data.g.horizon = spec.g.horizon;
  for (const auto& m : spec.g.modes)
    data.g.modes.push_back(ForcingMode{m.k, m.component, m.cos_amp(omega), m.sin_amp(omega)});
  return data;
}

namespace {

/// Spatial part of the forcing (without envelope) as a map (k, component) -> (cos, sin)
/// with k canonicalised to a half-space.
std::map<std::tuple<int, int, int>, std::pair<double, double>> canonical_modes(const Forcing& f, int dim, double sign) {
  std::map<std::tuple<int, int, int>, std::pair<double, double>> out;
  for (const auto& m : f.modes) {
    std::array<int, 2> k = m.k;
    double s = m.sin_amp;
    const int lead = (dim >= 1 && k[0] != 0) ? k[0] : (dim == 2 ? k[1] : 0);
    if (lead < 0) {
      k = {-k[0], -k[1]};
      s = -s;
    }
    if (dim == 1) k[1] = 0;
    auto& slot = out[{k[0], k[1], m.component}];
    slot.first += sign * m.cos_amp;
    slot.second += sign * s;
  }
  return out;
}

Field sample_forcing(const Forcing& f, double t, const GridSpec& grid) {
  Field out = Field::vector(grid);
  for (std::size_t c = 0; c < grid.cells(); ++c)
    f.evaluate(t, grid.center(c), grid.period, out.values().subspan(c * grid.dim, grid.dim));
  return out;
}

} // namespace

double data_distance(const DataRecord& x, const DataRecord& y, double sobolev_order) {
  if (!(x.grid() == y.grid())) throw ShapeError("data_distance: records on different grids");
  const GridSpec& grid = x.grid();
  double d = std::abs(x.mu - y.mu) + std::abs(x.eta - y.eta) + std::abs(x.a - y.a);
  d += fourier_sobolev_norm(field_sub(x.rho0, y.rho0), sobolev_order);
  d += fourier_sobolev_norm(field_sub(x.u0, y.u0), sobolev_order);
  if (!x.g.extra && !y.g.extra && x.g.envelope == y.g.envelope && x.g.horizon == y.g.horizon) {
    auto diff = canonical_modes(x.g, grid.dim, 1.0);
    for (auto& [key, v] : canonical_modes(y.g, grid.dim, -1.0)) {
      auto& slot = diff[key];
      slot.first += v.first;
      slot.second += v.second;
    }
    double s2 = 0.0;
    for (const auto& [key, v] : diff) {
      const double n = mode_norm({std::get<0>(key), std::get<1>(key)}, v.first, v.second, grid.dim, grid.period,
                                 sobolev_order);
      s2 += n * n;
    }
    d += envelope_sup(x.g.envelope, x.g.horizon) * std::sqrt(s2);
  } else {
    const double horizon = std::max(x.g.horizon, y.g.horizon);
    double sup = 0.0;
    for (int j = 0; j <= 32; ++j) {
      const double t = horizon * j / 32.0;
      sup = std::max(sup, fourier_sobolev_norm(field_sub(sample_forcing(x.g, t, grid), sample_forcing(y.g, t, grid)),
                                               sobolev_order));
    }
    d += sup;
  }
  return d;
}

double LatentBox::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < lo.size(); ++k) v *= hi[k] - lo[k];
  return v;
}

bool LatentBox::contains(const LatentPoint& omega) const {
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const double w = omega.coords[k];
    const bool upper_ok = w < hi[k] || (hi[k] == 1.0 && w == 1.0);
    if (!(w >= lo[k] && upper_ok)) return false;
  }
  return true;
}

std::size_t CollocationPartition::locate(const LatentPoint& omega) const {
  if (static_cast<int>(omega.dim()) != K) throw std::invalid_argument("locate: latent dimension mismatch");
  std::size_t idx = 0, stride = 1;
  for (int k = 0; k < K; ++k) {
    const double w = omega.coords[k];
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("locate: point outside the unit cube");
    int i = static_cast<int>(std::floor(w * per_axis));
    i = std::clamp(i, 0, per_axis - 1);
    // guard against rounding at cell faces
    if (w < static_cast<double>(i) / per_axis) --i;
    else if (i + 1 < per_axis && w >= static_cast<double>(i + 1) / per_axis) ++i;
    idx += static_cast<std::size_t>(i) * stride;
    stride *= static_cast<std::size_t>(per_axis);
  }
  return idx;
}

std::string to_string(CollocationPartition::PointRule r) {
  return r == CollocationPartition::PointRule::center ? "center" : "random_in_cell";
}

CollocationPartition::PointRule point_rule_from_string(const std::string& s) {
  if (s == "center") return CollocationPartition::PointRule::center;
  if (s == "random_in_cell") return CollocationPartition::PointRule::random_in_cell;
  throw std::invalid_argument("unknown collocation point rule: " + s);
}

CollocationPartition build_partition(int K, int per_axis, CollocationPartition::PointRule rule, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("build_partition: K must be >= 1");
  if (per_axis < 1) throw std::invalid_argument("build_partition: per_axis must be >= 1");
  std::size_t total = 1;
  for (int k = 0; k < K; ++k) {
    if (total > kMaxPartitionCells / static_cast<std::size_t>(per_axis))
      throw std::length_error("build_partition: too many cells");
    total *= static_cast<std::size_t>(per_axis);
  }

  CollocationPartition part;
  part.K = K;
  part.per_axis = per_axis;
  part.rule = rule;
  part.cells.reserve(total);
  part.points.reserve(total);
  part.weights.reserve(total);
  const double w = 1.0 / per_axis;
  for (std::size_t n = 0; n < total; ++n) {
    LatentBox box;
    box.lo.resize(K);
    box.hi.resize(K);
    LatentPoint pt;
    pt.coords.resize(K);
    const LatentPoint jitter = rule == CollocationPartition::PointRule::random_in_cell ? latent_point(seed, n, K)
                                                                                       : LatentPoint{};
    std::size_t rem = n;
    double vol = 1.0;
    for (int k = 0; k < K; ++k) {
      const int i = static_cast<int>(rem % per_axis);
      rem /= per_axis;
      box.lo[k] = i * w;
      box.hi[k] = (i + 1 == per_axis) ? 1.0 : (i + 1) * w;
      const double frac = rule == CollocationPartition::PointRule::center ? 0.5 : jitter.coords[k];
      pt.coords[k] = box.lo[k] + frac * (box.hi[k] - box.lo[k]);
      vol *= box.hi[k] - box.lo[k];
    }
    part.cells.push_back(std::move(box));
    part.points.push_back(std::move(pt));
    part.weights.push_back(vol);
  }
  return part;
}

CollocatedData collocate_data(const DistributionSpec& spec, const CollocationPartition& partition,
                              const GridSpec& grid) {
  CollocatedData out;
  out.partition = partition;
  out.records.reserve(partition.size());
  for (const auto& p : partition.points) out.records.push_back(realize_data(spec, p, grid));
  return out;
}

double collocation_sup_error(const DistributionSpec& spec, const CollocatedData& collocated, const GridSpec& grid,
                             int probes_per_axis) {
  if (probes_per_axis < 1) throw std::invalid_argument("collocation_sup_error: need at least one probe interval");
  const int K = spec.K;
  std::size_t total = 1;
  for (int k = 0; k < K; ++k) total *= static_cast<std::size_t>(probes_per_axis + 1);
  double sup = 0.0;
  LatentPoint omega;
  omega.coords.resize(K);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    for (int k = 0; k < K; ++k) {
      omega.coords[k] = static_cast<double>(rem % (probes_per_axis + 1)) / probes_per_axis;
      rem /= probes_per_axis + 1;
    }
    sup = std::max(sup, data_distance(collocated.at(omega), realize_data(spec, omega, grid), spec.sobolev_order));
  }
  return sup;
}

double latent_expectation(const std::function<double(const LatentPoint&)>& f, int K, int points_per_axis) {
  if (K < 1 || points_per_axis < 1) throw std::invalid_argument("latent_expectation: bad resolution");
  std::size_t total = 1;
  for (int k = 0; k < K; ++k) total *= static_cast<std::size_t>(points_per_axis);
  LatentPoint omega;
  omega.coords.resize(K);
  double s = 0.0;
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    for (int k = 0; k < K; ++k) {
      omega.coords[k] = (static_cast<double>(rem % points_per_axis) + 0.5) / points_per_axis;
      rem /= points_per_axis;
    }
    s += f(omega);
  }
  return s / static_cast<double>(total);
}

std::string to_string(EnsembleMode m) { return m == EnsembleMode::weak ? "weak" : "strong"; }

EnsembleMode ensemble_mode_from_string(const std::string& s) {
  if (s == "weak") return EnsembleMode::weak;
  if (s == "strong") return EnsembleMode::strong;
  throw std::invalid_argument("unknown ensemble mode: " + s);
}

void Ensemble::validate() const {
  if (members.empty()) throw std::invalid_argument("Ensemble: no members");
  if (weights.size() != members.size()) throw std::invalid_argument("Ensemble: weight count mismatch");
  double s = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("Ensemble: weights must be positive");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("Ensemble: weights must sum to one");
}

Ensemble build_ensemble(const DistributionSpec& spec, const GridSpec& grid, const SchemeConfig& cfg,
                        const std::vector<LatentPoint>& points, const std::vector<double>& weights,
                        EnsembleMode mode, int threads) {
  if (points.size() != weights.size()) throw std::invalid_argument("build_ensemble: points/weights mismatch");
  Ensemble ens;
  ens.mode = mode;
  ens.weights = weights;
  ens.members.resize(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    auto& m = ens.members[i];
    m.latent = points[i];
    m.data = realize_data(spec, points[i], grid);
    m.report = solve(m.data, cfg);
  });
  ens.validate();
  return ens;
}

Ensemble build_weak_ensemble(const DistributionSpec& spec, const GridSpec& grid, const SchemeConfig& cfg,
                             std::uint64_t seed, std::size_t count, int threads) {
  const auto pts = sample_latent(seed, count, spec.K);
  return build_ensemble(spec, grid, cfg, pts, std::vector<double>(count, 1.0 / static_cast<double>(count)),
                        EnsembleMode::weak, threads);
}

Ensemble build_strong_ensemble(const DistributionSpec& spec, const GridSpec& grid, const SchemeConfig& cfg,
                               const CollocationPartition& partition, int threads) {
  return build_ensemble(spec, grid, cfg, partition.points, partition.weights, EnsembleMode::strong, threads);
}

} // namespace nsuq
