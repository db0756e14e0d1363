#pragma once

// Reference computations that do not reuse library code paths.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace oracle {

/// Minimiser of a unimodal f on [a, b] by golden-section search.
inline double golden_section(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Adaptive Gauss-Kronrod integral of f over [0, 1].
inline double integrate01(const std::function<double(double)>& f) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 15, 1e-14);
}

/// Tensor Gauss-Kronrod integral over [0, 1]^2.
inline double integrate01_2(const std::function<double(double, double)>& f) {
  return integrate01([&](double x) { return integrate01([&](double y) { return f(x, y); }); });
}

/// Objective sum_n w_n (sum_c vol |y_nc - z_c|^q)^{r/q} for scalar samples.
inline double barycenter_objective(const std::vector<std::vector<double>>& samples, const std::vector<double>& w,
                                   const std::vector<double>& z, double vol, double r, double q) {
  double j = 0.0;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    double s = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) s += vol * std::pow(std::abs(samples[n][c] - z[c]), q);
    j += w[n] * std::pow(s, r / q);
  }
  return j;
}

/// Manufactured 1-D solution of the barotropic system: rho = 1 + A sin(2 pi (x - t)),
/// m = rho + c. Returns the defects of continuity and momentum at (t, x) computed by
/// central differences of the closed form, given the body force g per unit mass.
struct PdeDefect {
  double mass;
  double momentum;
};

inline PdeDefect manufactured_defect(double t, double x, double A, double c, double nu, double a, double gamma,
                                     double g, double h = 1e-4) {
  const double tau = 2.0 * std::acos(-1.0);
  auto rho = [&](double tt, double xx) { return 1.0 + A * std::sin(tau * (xx - tt)); };
  auto mom = [&](double tt, double xx) { return rho(tt, xx) + c; };
  auto vel = [&](double tt, double xx) { return mom(tt, xx) / rho(tt, xx); };
  auto flux = [&](double tt, double xx) {
    const double r = rho(tt, xx);
    const double m = mom(tt, xx);
    return m * m / r + a * std::pow(r, gamma);
  };
  auto dt = [&](auto f) { return (f(t + h, x) - f(t - h, x)) / (2.0 * h); };
  auto dx = [&](auto f) { return (f(t, x + h) - f(t, x - h)) / (2.0 * h); };
  const double uxx = (vel(t, x + h) - 2.0 * vel(t, x) + vel(t, x - h)) / (h * h);
  PdeDefect d;
  d.mass = dt(rho) + dx(mom);
  d.momentum = dt(mom) + dx(flux) - nu * uxx - rho(t, x) * g;
  return d;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

} // namespace oracle
