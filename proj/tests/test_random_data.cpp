#include "nsuq/random_data.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nsuq;
using doctest::Approx;

namespace {

DistributionSpec base_spec(int K = 2) {
  DistributionSpec s;
  s.K = K;
  s.dim = 1;
  s.gamma = 1.4;
  s.bounds = {0.5, 0.01, 0.5, 2.0, 1.0};
  s.mu = ParameterTransform::uniform(0, 0.02, 0.04);
  s.a = ParameterTransform::truncated_normal(K - 1, 0.8, 1.2, 1.0, 0.1);
  s.rho0 = {{1.0}, {RandomMode{{1, 0}, 0, 0, 0.0, 0.2, 0.05, 0.0}}};
  s.u0 = {{0.1}, {RandomMode{{2, 0}, 0, K - 1, 0.1, -0.2, 0.0, 0.0}}};
  s.g = {{RandomMode{{1, 0}, 0, 0, 0.2, 0.3, 0.0, 0.0}}, {1.0}, 1.0};
  return s;
}

} // namespace

TEST_CASE("latent stream determinism and uniformity") {
  const auto a = sample_latent(42, 100, 3);
  const auto b = sample_latent(42, 100, 3);
  CHECK(a == b);
  CHECK(sample_latent(43, 100, 3) != a);
  // index addressable: a prefix of a longer stream
  const auto longer = sample_latent(42, 150, 3);
  CHECK(std::equal(a.begin(), a.end(), longer.begin()));

  const auto one = sample_latent(1, 1, 2);
  REQUIRE(one.size() == 1);
  for (double w : one[0].coords) CHECK((w >= 0.0 && w < 1.0));

  const std::size_t N = 10000;
  const auto pts = sample_latent(7, N, 2);
  for (int k = 0; k < 2; ++k) {
    double s = 0.0;
    for (const auto& p : pts) s += p.coords[k];
    CHECK(std::abs(s / N - 0.5) <= 3.0 / std::sqrt(12.0 * N));
  }
}

TEST_CASE("parameter transforms") {
  const auto u = ParameterTransform::uniform(0, 0.01, 0.02);
  CHECK(u(LatentPoint{{0.0}}) == Approx(0.01));
  CHECK(u(LatentPoint{{1.0}}) == Approx(0.02));
  CHECK(u(LatentPoint{{0.5}}) == Approx(0.015));
  CHECK(u.lipschitz() == Approx(0.01));

  const auto tn = ParameterTransform::truncated_normal(0, 0.5, 1.5, 1.0, 0.3);
  CHECK(tn(LatentPoint{{0.5}}) == Approx(1.0)); // symmetric truncation: median at the mean
  CHECK(tn(LatentPoint{{0.0}}) == Approx(0.5));
  CHECK(tn(LatentPoint{{1.0}}) == Approx(1.5));
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = tn(LatentPoint{{i / 100.0}});
    CHECK(v >= prev);
    prev = v;
  }
  // finite-difference slope never exceeds the declared Lipschitz constant
  for (int i = 0; i < 1000; ++i) {
    const double w = i / 1000.0, h = 1e-3;
    CHECK(std::abs(tn(LatentPoint{{w + h}}) - tn(LatentPoint{{w}})) <= tn.lipschitz() * h * (1 + 1e-9));
  }
}

TEST_CASE("realize data at the cube centre and endpoints") {
  const auto spec = base_spec();
  REQUIRE_NOTHROW(spec.validate());
  const GridSpec g(1, 16);
  const DataRecord d = realize_data(spec, LatentPoint{{0.5, 0.5}}, g);
  CHECK(d.mu == Approx(0.03));
  CHECK(d.a == Approx(1.0));
  CHECK(d.gamma == 1.4);
  CHECK(validate_admissible(d, spec.bounds).admissible());

  auto s2 = spec;
  s2.mu = ParameterTransform::uniform(0, spec.bounds.mu_lower, 2 * spec.bounds.mu_lower);
  CHECK(realize_data(s2, LatentPoint{{0.0, 0.3}}, g).mu == Approx(spec.bounds.mu_lower));

  // field modes are sampled at cell centres
  const DataRecord e = realize_data(spec, LatentPoint{{1.0, 0.0}}, g);
  for (std::size_t c = 0; c < g.cells(); ++c) {
    const double x = g.center(c)[0];
    CHECK(e.rho0(c) == Approx(1.0 + 0.2 * std::cos(2 * std::numbers::pi * x) + 0.05 * std::sin(2 * std::numbers::pi * x)));
  }

  CHECK_THROWS(realize_data(spec, LatentPoint{{0.5}}, g));
  CHECK_THROWS(realize_data(spec, LatentPoint{{0.5, 1.5}}, g));
  CHECK_THROWS(realize_data(spec, LatentPoint{{0.5, 0.5}}, GridSpec(1, 4))); // k = 2 not resolved
}

TEST_CASE("every latent point maps into the admissible set") {
  const auto spec = base_spec();
  const GridSpec g(1, 16);
  for (const auto& p : sample_latent(3, 300, spec.K))
    CHECK(validate_admissible(realize_data(spec, p, g), spec.bounds).admissible());
  for (double w0 : {0.0, 1.0})
    for (double w1 : {0.0, 1.0})
      CHECK(validate_admissible(realize_data(spec, LatentPoint{{w0, w1}}, g), spec.bounds).admissible());
}

TEST_CASE("validation rejects specs that leave the admissible set") {
  auto s = base_spec();
  s.mu = ParameterTransform::uniform(0, 0.005, 0.02);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = base_spec();
  s.rho0.modes[0].cos_slope = 0.6;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = base_spec();
  s.g.modes[0].cos_slope = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = base_spec();
  s.a = ParameterTransform::uniform(0, 0.1, 1.0);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = base_spec();
  s.eta = ParameterTransform::uniform(0, -0.1, 0.1);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = base_spec();
  s.mu = ParameterTransform::uniform(5, 0.02, 0.03);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("data map is Lipschitz with the declared constant") {
  const auto spec = base_spec();
  const GridSpec g(1, 16);
  const double L = spec.lipschitz();
  for (const auto& p : sample_latent(5, 50, spec.K))
    for (int k = 0; k < spec.K; ++k)
      for (double delta : {1e-1, 1e-2, 1e-4}) {
        LatentPoint q = p;
        q.coords[k] = std::min(1.0, q.coords[k] + delta);
        const double step = q.coords[k] - p.coords[k];
        const double dist = data_distance(realize_data(spec, p, g), realize_data(spec, q, g), spec.sobolev_order);
        CHECK(dist <= L * step * (1 + 1e-9) + 1e-15);
      }
}

TEST_CASE("collocation partitions") {
  const auto p = build_partition(1, 2);
  REQUIRE(p.size() == 2);
  CHECK(p.cells[0].lo[0] == 0.0);
  CHECK(p.cells[0].hi[0] == 0.5);
  CHECK(p.cells[1].hi[0] == 1.0);
  CHECK(p.points[0].coords[0] == 0.25);
  CHECK(p.points[1].coords[0] == 0.75);
  CHECK(p.weights == std::vector<double>{0.5, 0.5});
  CHECK(p.locate(LatentPoint{{0.5}}) == 1);
  CHECK(p.locate(LatentPoint{{1.0}}) == 1);
  CHECK(p.locate(LatentPoint{{0.0}}) == 0);

  const auto q = build_partition(2, 3);
  REQUIRE(q.size() == 9);
  for (double w : q.weights) CHECK(w == Approx(1.0 / 9.0));
  for (std::size_t n = 0; n < q.size(); ++n) {
    CHECK(q.cells[n].contains(q.points[n]));
    CHECK(q.locate(q.points[n]) == n);
  }

  const auto r = build_partition(2, 4, CollocationPartition::PointRule::random_in_cell, 9);
  for (std::size_t n = 0; n < r.size(); ++n) CHECK(r.locate(r.points[n]) == n);
  CHECK(r.points != build_partition(2, 4).points);

  CHECK_THROWS_AS(build_partition(21, 2), std::length_error);
  CHECK_THROWS_AS(build_partition(3, 128), std::length_error);
  CHECK_THROWS_AS(build_partition(2, 1025), std::length_error);
  CHECK(build_partition(3, 16).size() == 4096);
}

TEST_CASE("collocated data errors") {
  const GridSpec g(1, 16);
  DistributionSpec constant;
  constant.K = 2;
  constant.bounds = {0.5, 0.5, 1.0, 1.0, 1.0};
  const auto cd = collocate_data(constant, build_partition(2, 3), g);
  CHECK(collocation_sup_error(constant, cd, g, 12) == 0.0);

  DistributionSpec lin;
  lin.K = 1;
  lin.bounds = {0.5, 0.1, 1.0, 1.0, 1.0};
  lin.mu = ParameterTransform::uniform(0, 0.1, 0.2); // mu(w) = mu_lower (1 + w)
  double prev = 0.0;
  for (int N : {2, 4, 8, 16}) {
    const auto c = collocate_data(lin, build_partition(1, N), g);
    const double e = collocation_sup_error(lin, c, g, 4 * N);
    CHECK(e == Approx(0.1 / (2 * N)).epsilon(1e-12));
    if (prev > 0.0) CHECK(prev / e == Approx(2.0).epsilon(1e-9));
    prev = e;
  }
}

TEST_CASE("latent expectation against Gauss-Kronrod") {
  auto f = [](const LatentPoint& w) { return std::exp(w.coords[0]) * std::cos(w.coords[1]); };
  const double exact = oracle::integrate01_2([](double x, double y) { return std::exp(x) * std::cos(y); });
  CHECK(latent_expectation(f, 2, 200) == Approx(exact).epsilon(1e-5));
}

TEST_CASE("ensembles") {
  auto spec = base_spec();
  SchemeConfig cfg;
  cfg.final_time = 0.02;
  const GridSpec g(1, 16);
  const auto w1 = build_weak_ensemble(spec, g, cfg, 11, 6, 1);
  const auto w3 = build_weak_ensemble(spec, g, cfg, 11, 6, 3);
  CHECK_NOTHROW(w1.validate());
  REQUIRE(w1.size() == 6);
  for (std::size_t i = 0; i < w1.size(); ++i) {
    CHECK(w1.weights[i] == Approx(1.0 / 6.0));
    CHECK(w1.members[i].latent == w3.members[i].latent);
    CHECK(w1.members[i].report.trajectory.back().rho == w3.members[i].report.trajectory.back().rho);
    CHECK(w1.members[i].report.completed());
  }
  const auto part = build_partition(spec.K, 2);
  const auto s = build_strong_ensemble(spec, g, cfg, part, 2);
  CHECK(s.mode == EnsembleMode::strong);
  CHECK(s.weights == part.weights);
  CHECK(ensemble_mode_from_string(to_string(EnsembleMode::strong)) == EnsembleMode::strong);

  Ensemble bad = s;
  bad.weights[0] = 0.0;
  CHECK_THROWS(bad.validate());
}
