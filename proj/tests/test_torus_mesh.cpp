#include "nsuq/torus_mesh.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace nsuq;
using doctest::Approx;

namespace {

Field random_field(std::mt19937_64& rng, const GridSpec& g, int comps) {
  Field f(g, comps);
  const auto v = oracle::random_vector(rng, f.size(), -1.0, 1.0);
  std::copy(v.begin(), v.end(), f.values().begin());
  return f;
}

} // namespace

TEST_CASE("grid geometry") {
  GridSpec g(2, 8, 2.0);
  CHECK(g.cells() == 64);
  CHECK(g.dx() == 0.25);
  CHECK(g.cell_volume() == Approx(0.0625));
  CHECK(g.volume() == Approx(4.0));
  CHECK(g.cell({-1, 0}) == 7);
  CHECK(g.cell({0, 8}) == 0);
  CHECK(g.neighbour(0, 1, -1) == 56);
  for (std::size_t c = 0; c < g.cells(); ++c) CHECK(g.cell(g.index(c)) == c);
  CHECK_THROWS_AS(GridSpec(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1, 4, 0.0), std::invalid_argument);
}

TEST_CASE("lq norm examples") {
  GridSpec g(1, 16);
  CHECK(lq_norm(Field::scalar(g, -3.0), 1.0) == Approx(3.0));
  CHECK(lq_norm(Field::scalar(g, -3.0), 2.5) == Approx(3.0));
  CHECK(lq_norm(Field::scalar(g, -3.0), kInfinity) == 3.0);

  Field half = Field::scalar(g);
  for (std::size_t c = 0; c < 8; ++c) half(c) = 1.0;
  CHECK(lq_norm(half, 1.0) == Approx(0.5));
  CHECK_THROWS_AS(lq_norm(half, 0.5), std::domain_error);

  // midpoint quadrature of sin^2 over whole periods is exact
  Field s = Field::scalar(GridSpec(1, 64));
  for (std::size_t c = 0; c < 64; ++c) s(c) = std::sin(2 * std::numbers::pi * s.grid().center(c)[0]);
  CHECK(lq_norm(s, 2.0) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("field arithmetic") {
  std::mt19937_64 rng(1);
  GridSpec g(2, 4);
  Field f = random_field(rng, g, 2);
  Field h = random_field(rng, g, 2);
  CHECK(lq_norm(field_sub(f, f), kInfinity) == 0.0);
  const Field two_f = field_add(field_scale(2.0, f), field_scale(0.0, h));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(two_f.values()[i] == 2.0 * f.values()[i]);
  CHECK_THROWS_AS(field_add(f, Field::scalar(g)), ShapeError);
  CHECK_THROWS_AS(field_add(f, Field::vector(GridSpec(2, 8))), ShapeError);
}

TEST_CASE("negative Sobolev norm examples") {
  GridSpec g(1, 32);
  CHECK(neg_sobolev_norm(Field::scalar(g), 3) == 0.0);
  CHECK(neg_sobolev_norm(Field::scalar(g, 2.5), 3) == Approx(2.5).epsilon(1e-14));

  // cos(2 pi x) = (e^{i 2 pi x} + e^{-i 2 pi x}) / 2: two coefficients of size 1/2
  Field f = Field::scalar(g);
  for (std::size_t c = 0; c < g.cells(); ++c) f(c) = std::cos(2 * std::numbers::pi * g.center(c)[0]);
  const double expected = std::pow(1.0 + 4.0 * std::numbers::pi * std::numbers::pi, -1.5) / std::sqrt(2.0);
  CHECK(neg_sobolev_norm(f, 3) == Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(neg_sobolev_norm(f, 2), std::domain_error);
  CHECK_THROWS_AS(neg_sobolev_norm(Field::scalar(GridSpec(2, 8)), 3), std::domain_error);
}

TEST_CASE("Fourier norm properties on random fields") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + trial % 2;
    const GridSpec g(dim, dim == 1 ? 32 : 8, 1.0 + 0.1 * trial);
    const Field f = random_field(rng, g, 1);
    const double l2 = lq_norm(f, 2.0);

    // Parseval with the mean-normalised transform
    double s = 0.0;
    for (auto z : fourier_coefficients(f)) s += std::norm(z);
    CHECK(std::sqrt(s * g.volume()) == Approx(l2).epsilon(1e-10));
    CHECK(fourier_sobolev_norm(f, 0.0) == Approx(l2).epsilon(1e-10));

    double prev = l2;
    for (int m = dim + 2; m <= dim + 6; ++m) {
      const double v = neg_sobolev_norm(f, m);
      CHECK(v <= prev * (1 + 1e-12));
      prev = v;
    }
  }
}

TEST_CASE("restriction and prolongation") {
  GridSpec fine(1, 4), coarse(1, 2);
  Field f(fine, 1, std::vector<double>{1, 1, 3, 3});
  const Field r = restrict_or_prolong(f, coarse);
  CHECK(r(0) == 1.0);
  CHECK(r(1) == 3.0);

  const Field c = Field::scalar(GridSpec(2, 4), 1.7);
  const Field back = restrict_or_prolong(restrict_or_prolong(c, GridSpec(2, 16)), GridSpec(2, 4));
  for (std::size_t i = 0; i < back.cells(); ++i) CHECK(back(i) == Approx(1.7));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Field x = random_field(rng, GridSpec(2, 16), 2);
    const Field y = restrict_or_prolong(x, GridSpec(2, 4));
    CHECK(y.integral() == Approx(x.integral()).epsilon(1e-13));
    CHECK(y.mean() == Approx(x.mean()).epsilon(1e-13));
  }
  CHECK_THROWS_AS(restrict_or_prolong(f, GridSpec(1, 3)), ShapeError);
  CHECK_THROWS_AS(restrict_or_prolong(f, GridSpec(2, 2)), ShapeError);
}

TEST_CASE("space-time negative norm of a series") {
  GridSpec g(1, 16);
  std::vector<Field> series{Field::scalar(g, 1.0), Field::scalar(g, 1.0), Field::scalar(g, 1.0)};
  std::vector<double> times{0.0, 0.5, 2.0};
  CHECK(neg_sobolev_norm(series, times, 3) == Approx(std::sqrt(2.0)));
  std::vector<double> t{0.0, 1.0, 3.0}, y{1.0, 1.0, 2.0};
  CHECK(trapezoid(t, y) == Approx(4.0));
}

TEST_CASE("field serialisation round trip") {
  std::mt19937_64 rng(11);
  const Field f = random_field(rng, GridSpec(2, 4, 3.0), 2);
  {
    std::stringstream ss;
    write_field_csv(ss, f);
    CHECK(read_field_csv(ss) == f);
  }
  {
    std::stringstream ss;
    write_field_binary(ss, f);
    CHECK(read_field_binary(ss) == f);
  }
  std::stringstream bad("NOPE");
  CHECK_THROWS(read_field_binary(bad));
}
