#include "nsuq/physics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nsuq;
using doctest::Approx;

TEST_CASE("pressure law examples") {
  CHECK(pressure(0.0, 1.0, 2.0) == 0.0);
  CHECK(pressure(2.0, 1.0, 2.0) == Approx(4.0));
  CHECK(pressure(1.0, 3.0, 1.4) == Approx(3.0));
  CHECK_THROWS_AS(pressure(-1.0, 1.0, 2.0), std::domain_error);

  CHECK(pressure_potential(0.0, 1.0, 2.0) == 0.0);
  CHECK(pressure_potential(2.0, 1.0, 2.0) == Approx(4.0));
  CHECK(pressure_potential(1.0, 2.0, 3.0) == Approx(1.0));
  CHECK_THROWS_AS(pressure_potential(1.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(pressure_potential(1.0, 1.0, 0.5), std::domain_error);
}

TEST_CASE("pressure potential identity with finite-difference derivative") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rho_d(1e-3, 10.0), a_d(0.5, 3.0), g_d(1.0 + 1e-3, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double rho = rho_d(rng), a = a_d(rng), gamma = g_d(rng);
    const double p = pressure(rho, a, gamma);
    const double P = pressure_potential(rho, a, gamma);
    // double-precision central difference: rounding error grows like eps * P / step
    const double h = 1e-6 * rho;
    const double dP = (pressure_potential(rho + h, a, gamma) - pressure_potential(rho - h, a, gamma)) / (2 * h);
    CHECK(std::abs(dP * rho - P - p) <= 1e-8 * (1 + P));
    // same step in extended precision
    const long double hl = 1e-6L * rho;
    const long double dPl = (pressure_potential(rho + hl, (long double)a, (long double)gamma) -
                             pressure_potential(rho - hl, (long double)a, (long double)gamma)) /
                            (2 * hl);
    CHECK(std::abs(static_cast<double>(dPl * rho - pressure_potential((long double)rho, (long double)a,
                                                                       (long double)gamma)) - p) <=
          1e-10 * (1 + p) + 1e-12 * P);
    // analytic derivative satisfies it to rounding
    CHECK(std::abs(pressure_potential_derivative(rho, a, gamma) * rho - P - p) <= 1e-12 * (1 + P));
  }
}

TEST_CASE("viscous stress examples") {
  const VelocityGradient zero{};
  const auto s0 = viscous_stress(zero, 1.0, 1.0, 2);
  for (double v : s0.v) CHECK(v == 0.0);

  const VelocityGradient id{1, 0, 0, 1};
  const auto s1 = viscous_stress(id, 1.0, 0.0, 2);
  for (double v : s1.v) CHECK(v == Approx(0.0));
  const auto s2 = viscous_stress(id, 0.0, 1.0, 2);
  CHECK(s2(0, 0) == Approx(2.0));
  CHECK(s2(1, 1) == Approx(2.0));
  CHECK(s2(0, 1) == 0.0);

  const auto s3 = viscous_stress({0.5, 0, 0, 0}, 0.3, 0.2, 1);
  CHECK(s3(0, 0) == Approx(0.25));
}

TEST_CASE("viscous stress properties") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const VelocityGradient g{u(rng), u(rng), u(rng), u(rng)};
    const double mu = pos(rng), eta = pos(rng);
    const auto s = viscous_stress(g, mu, eta, 2);
    CHECK(s.is_symmetric(1e-14));
    CHECK(s.trace() == Approx(2.0 * eta * (g[0] + g[3])).epsilon(1e-12));

    // trace-free symmetric gradient with eta = 0: S = 2 mu grad u
    const double p = u(rng), q = u(rng);
    const VelocityGradient tf{p, q, q, -p};
    const auto t = viscous_stress(tf, mu, 0.0, 2);
    for (int k = 0; k < 4; ++k) CHECK(t.v[k] == Approx(2.0 * mu * tf[k]).epsilon(1e-13));
  }
}

TEST_CASE("total energy examples and symmetry") {
  GridSpec g1(1, 8), g2(2, 8);
  CHECK(total_energy(FluidState::from_velocity(Field::scalar(g1, 1.0), Field::vector(g1)), 1.0, 2.0) == Approx(1.0));
  Field u = Field::vector(g2);
  for (std::size_t c = 0; c < g2.cells(); ++c) u(c, 0) = 2.0;
  CHECK(total_energy(FluidState::from_velocity(Field::scalar(g2, 1.0), u), 1.0, 2.0) == Approx(3.0));
  // density tending to zero with bounded velocity
  CHECK(total_energy(FluidState::from_velocity(Field::scalar(g1, 1e-12), Field::vector(g1, 1.0)), 1.0, 2.0) <
        1e-11);
  CHECK_THROWS_AS(total_energy(FluidState(Field::scalar(g1, 0.0), Field::vector(g1)), 1.0, 2.0),
                  AdmissibilityError);

  std::mt19937_64 rng(2);
  Field rho = Field::scalar(g2), v = Field::vector(g2);
  const auto r = oracle::random_vector(rng, rho.size(), 0.5, 2.0);
  const auto w = oracle::random_vector(rng, v.size(), -1.0, 1.0);
  std::copy(r.begin(), r.end(), rho.values().begin());
  std::copy(w.begin(), w.end(), v.values().begin());
  const double e = total_energy(FluidState::from_velocity(rho, v), 1.5, 1.4);
  CHECK(total_energy(FluidState::from_velocity(rho, field_scale(-1.0, v)), 1.5, 1.4) == e);
  CHECK(e >= 0.0);
}

namespace {

DataRecord record(const GridSpec& g, double rho, double mu, double eta, double a, double g_amp) {
  DataRecord d;
  d.rho0 = Field::scalar(g, rho);
  d.u0 = Field::vector(g);
  d.mu = mu;
  d.eta = eta;
  d.a = a;
  d.gamma = 2.0;
  if (g_amp != 0.0) d.g.modes.push_back({{1, 0}, 0, g_amp, 0.0});
  return d;
}

} // namespace

TEST_CASE("admissibility examples") {
  const AdmissibleBounds b{0.5, 0.1, 1.0, 2.0, 1.0};
  const GridSpec g(1, 8);
  CHECK(validate_admissible(record(g, 0.25, 0.2, 0.1, 1.5, 0.5), b).violated == Constraint::density);
  CHECK(validate_admissible(record(g, 0.5, 0.1, 0.0, 1.0, 1.0), b).admissible());
  CHECK(validate_admissible(record(g, 0.5, 0.1, 0.0, 2.0, 1.0), b).admissible());
  CHECK(validate_admissible(record(g, 1.0, 0.2, 0.0, 1.5, 0.0), b).admissible());
  CHECK(validate_admissible(record(g, 1.0, 0.05, 0.0, 1.5, 0.0), b).violated == Constraint::shear_viscosity);
  CHECK(validate_admissible(record(g, 1.0, 0.2, -0.1, 1.5, 0.0), b).violated == Constraint::bulk_viscosity);
  CHECK(validate_admissible(record(g, 1.0, 0.2, 0.0, 2.5, 0.0), b).violated == Constraint::pressure_coefficient);
  CHECK(validate_admissible(record(g, 1.0, 0.2, 0.0, 1.5, 1.5), b).violated == Constraint::forcing);
}

TEST_CASE("admissibility agrees with direct inequality evaluation") {
  const AdmissibleBounds b{0.5, 0.1, 1.0, 2.0, 1.0};
  const GridSpec g(1, 8);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> rho(0.3, 0.7), mu(0.05, 0.15), eta(-0.05, 0.1), a(0.8, 2.2), ga(-1.3, 1.3);
  int accepted = 0;
  for (int i = 0; i < 2000; ++i) {
    const double r = rho(rng), m = mu(rng), e = eta(rng), p = a(rng), f = ga(rng);
    DataRecord d = record(g, 1.0, m, e, p, f);
    for (std::size_t c = 0; c < g.cells(); ++c) d.rho0(c) = c == 3 ? r : 1.0;
    const bool expected = r >= b.rho_lower && m >= b.mu_lower && e >= 0.0 && p >= b.a_lower && p <= b.a_upper &&
                          std::abs(f) <= b.g_sup;
    CHECK(validate_admissible(d, b).admissible() == expected);
    accepted += expected;
  }
  CHECK(accepted > 50);
}

TEST_CASE("forcing evaluation and sup bound") {
  Forcing f;
  f.modes.push_back({{1, 0}, 0, 0.3, 0.4});
  f.envelope = {1.0, -0.5};
  f.horizon = 1.0;
  CHECK(f.sup_bound(1) == Approx(0.5 * 1.5));
  double out[1] = {0.0};
  f.evaluate(0.0, {0.0, 0.0}, 1.0, out);
  CHECK(out[0] == Approx(0.3));
  double sup = 0.0;
  for (int i = 0; i <= 200; ++i)
    for (int j = 0; j <= 200; ++j) {
      double v[1] = {0.0};
      f.evaluate(i / 200.0, {j / 200.0, 0.0}, 1.0, v);
      sup = std::max(sup, std::abs(v[0]));
    }
  CHECK(sup <= f.sup_bound(1));
  CHECK(Forcing{}.is_zero());
}
