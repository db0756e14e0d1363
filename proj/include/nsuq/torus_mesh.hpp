#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsuq {

/// Thrown when two fields (or a field and a grid) do not have compatible layouts.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform periodic grid on the flat torus [0, period)^dim.
///
/// Cells are numbered with the x index running fastest: c = i0 + n * i1.
struct GridSpec {
  int dim = 1;
  int n = 2;
  double period = 1.0;

  GridSpec() = default;
  GridSpec(int dim_, int n_, double period_ = 1.0);

  std::size_t cells() const;
  double dx() const { return period / n; }
  double cell_volume() const;
  double volume() const;

  /// Multi-index of cell c (only the first dim entries are meaningful).
  std::array<int, 2> index(std::size_t c) const;
  std::size_t cell(std::array<int, 2> idx) const;
  /// Neighbour of c shifted by `shift` cells along `axis`, periodically wrapped.
  std::size_t neighbour(std::size_t c, int axis, int shift) const;
  std::array<double, 2> center(std::size_t c) const;

  bool operator==(const GridSpec&) const = default;
};

/// Cell-centred field with `components` values per cell (1 for scalars, dim for vectors).
class Field {
public:
  Field() = default;
  Field(GridSpec grid, int components, double fill = 0.0);
  Field(GridSpec grid, int components, std::vector<double> values);

  static Field scalar(const GridSpec& grid, double fill = 0.0) { return Field(grid, 1, fill); }
  static Field vector(const GridSpec& grid, double fill = 0.0) { return Field(grid, grid.dim, fill); }

  const GridSpec& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t cells() const { return grid_.cells(); }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t cell, int comp = 0) { return values_[cell * components_ + comp]; }
  double operator()(std::size_t cell, int comp = 0) const { return values_[cell * components_ + comp]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Euclidean magnitude of the value vector in one cell.
  double magnitude(std::size_t cell) const;
  /// Midpoint-rule integral of each component, summed over components.
  double integral() const;
  double mean() const { return integral() / grid_.volume(); }
  bool all_finite() const;

  bool same_layout(const Field& other) const {
    return grid_ == other.grid_ && components_ == other.components_;
  }
  bool operator==(const Field&) const = default;

private:
  GridSpec grid_{};
  int components_ = 1;
  std::vector<double> values_;
};

using ScalarField = Field;
using VectorField = Field;

// Pointwise linear algebra. All throw ShapeError on layout mismatch.
Field field_axpy(double alpha, const Field& x, const Field& y); ///< alpha * x + y
Field field_scale(double alpha, const Field& x);
Field field_sub(const Field& x, const Field& y);
Field field_add(const Field& x, const Field& y);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Midpoint-quadrature L^q norm; q = kInfinity gives the max over cells.
/// Vector fields use the Euclidean magnitude per cell.
double lq_norm(const Field& f, double q);

/// Discrete Fourier coefficients of one component, normalised so that entry 0 is the mean.
/// Layout matches the cell numbering.
std::vector<std::complex<double>> fourier_coefficients(const Field& f, int component = 0);

/// |2 pi k / period|^2 for the wavenumber of DFT index c.
double wavenumber_squared(const GridSpec& grid, std::size_t c);

/// Sobolev-weighted Fourier norm: ||f||^2 = |T^d| sum_k |f_k|^2 (1 + |2 pi k / L|^2)^order.
/// order = 0 reproduces the L^2 norm (Parseval); negative orders give W^{-m,2}.
double fourier_sobolev_norm(const Field& f, double order);

/// W^{-m,2}(T^d) norm; requires m > d + 1.
double neg_sobolev_norm(const Field& f, int m);
/// L^2(0,T; W^{-m,2}) norm of a time series of fields, trapezoid rule in time.
double neg_sobolev_norm(std::span<const Field> series, std::span<const double> times, int m);

/// Default negative Sobolev order for dimension d.
inline int default_sobolev_order(int dim) { return dim + 2; }

/// Cell-averaging restriction (fine to coarse) or piecewise-constant prolongation
/// (coarse to fine). Grids must be nested with equal dimension and period.
Field restrict_or_prolong(const Field& f, const GridSpec& target);

/// Trapezoid rule for samples at (strictly increasing) times.
double trapezoid(std::span<const double> times, std::span<const double> samples);

// Snapshot serialisation. CSV: header row "d,n,period,components", one value row,
// then one row per cell (x index fastest) with comma-separated components.
// Binary: magic "NSQF", int32 d, int32 n, float64 period, int32 components,
// then float64 values, all little endian.
void write_field_csv(std::ostream& os, const Field& f);
Field read_field_csv(std::istream& is);
void write_field_binary(std::ostream& os, const Field& f);
Field read_field_binary(std::istream& is);

} // namespace nsuq
