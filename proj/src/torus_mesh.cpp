#include "nsuq/torus_mesh.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

namespace nsuq {

GridSpec::GridSpec(int dim_, int n_, double period_) : dim(dim_), n(n_), period(period_) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("GridSpec: dimension must be 1 or 2");
  if (n < 2) throw std::invalid_argument("GridSpec: need at least 2 cells per axis");
  if (!(period > 0.0) || !std::isfinite(period)) throw std::invalid_argument("GridSpec: period must be positive");
}

std::size_t GridSpec::cells() const {
  std::size_t c = 1;
  for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(n);
  return c;
}

double GridSpec::cell_volume() const { return std::pow(dx(), dim); }
double GridSpec::volume() const { return std::pow(period, dim); }

std::array<int, 2> GridSpec::index(std::size_t c) const {
  if (dim == 1) return {static_cast<int>(c), 0};
  return {static_cast<int>(c % n), static_cast<int>(c / n)};
}

std::size_t GridSpec::cell(std::array<int, 2> idx) const {
  auto wrap = [this](int i) { return ((i % n) + n) % n; };
  if (dim == 1) return static_cast<std::size_t>(wrap(idx[0]));
  return static_cast<std::size_t>(wrap(idx[0]) + n * wrap(idx[1]));
}

std::size_t GridSpec::neighbour(std::size_t c, int axis, int shift) const {
  auto idx = index(c);
  idx[axis] += shift;
  return cell(idx);
}

std::array<double, 2> GridSpec::center(std::size_t c) const {
  auto idx = index(c);
  std::array<double, 2> x{0.0, 0.0};
  for (int a = 0; a < dim; ++a) x[a] = (idx[a] + 0.5) * dx();
  return x;
}

Field::Field(GridSpec grid, int components, double fill)
    : grid_(grid), components_(components), values_(grid.cells() * components, fill) {
  if (components < 1) throw ShapeError("Field: components must be positive");
}

Field::Field(GridSpec grid, int components, std::vector<double> values)
    : grid_(grid), components_(components), values_(std::move(values)) {
  if (components < 1) throw ShapeError("Field: components must be positive");
  if (values_.size() != grid_.cells() * components_)
    throw ShapeError("Field: value count does not match grid");
}

double Field::magnitude(std::size_t cell) const {
  if (components_ == 1) return std::abs(values_[cell]);
  double s = 0.0;
  for (int k = 0; k < components_; ++k) s += values_[cell * components_ + k] * values_[cell * components_ + k];
  return std::sqrt(s);
}

double Field::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.cell_volume();
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_same_layout(const Field& x, const Field& y, const char* what) {
  if (!x.same_layout(y)) throw ShapeError(std::string(what) + ": field layouts differ");
}

} // namespace

Field field_axpy(double alpha, const Field& x, const Field& y) {
  require_same_layout(x, y, "field_axpy");
  Field out = y;
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += alpha * xv[i];
  return out;
}

Field field_scale(double alpha, const Field& x) {
  Field out = x;
  for (double& v : out.values()) v *= alpha;
  return out;
}

Field field_sub(const Field& x, const Field& y) {
  require_same_layout(x, y, "field_sub");
  Field out = x;
  auto yv = y.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] -= yv[i];
  return out;
}

Field field_add(const Field& x, const Field& y) { return field_axpy(1.0, x, y); }

double lq_norm(const Field& f, double q) {
  if (!(q >= 1.0)) throw std::domain_error("lq_norm: q must be >= 1 or infinity");
  const std::size_t cells = f.cells();
  if (std::isinf(q)) {
    double m = 0.0;
    for (std::size_t c = 0; c < cells; ++c) m = std::max(m, f.magnitude(c));
    return m;
  }
  double s = 0.0;
  for (std::size_t c = 0; c < cells; ++c) s += std::pow(f.magnitude(c), q);
  return std::pow(s * f.grid().cell_volume(), 1.0 / q);
}

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan forward(const GridSpec& grid) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(grid.dim, grid.n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> in(grid.cells()), out(grid.cells());
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = grid.dim == 1 ? fftw_plan_dft_1d(grid.n, pin, pout, FFTW_FORWARD, flags)
                                   : fftw_plan_dft_2d(grid.n, grid.n, pin, pout, FFTW_FORWARD, flags);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

} // namespace

std::vector<std::complex<double>> fourier_coefficients(const Field& f, int component) {
  if (component < 0 || component >= f.components()) throw ShapeError("fourier_coefficients: bad component");
  const std::size_t cells = f.cells();
  std::vector<std::complex<double>> in(cells), out(cells);
  for (std::size_t c = 0; c < cells; ++c) in[c] = f(c, component);
  fftw_plan plan = PlanCache::instance().forward(f.grid());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(cells);
  for (auto& z : out) z *= scale;
  return out;
}

double wavenumber_squared(const GridSpec& grid, std::size_t c) {
  auto idx = grid.index(c);
  double k2 = 0.0;
  for (int a = 0; a < grid.dim; ++a) {
    int k = idx[a] <= grid.n / 2 ? idx[a] : idx[a] - grid.n;
    double w = 2.0 * std::numbers::pi * k / grid.period;
    k2 += w * w;
  }
  return k2;
}

double fourier_sobolev_norm(const Field& f, double order) {
  const auto& grid = f.grid();
  std::vector<double> weight(f.cells());
  for (std::size_t c = 0; c < f.cells(); ++c) weight[c] = std::pow(1.0 + wavenumber_squared(grid, c), order);
  double s = 0.0;
  for (int comp = 0; comp < f.components(); ++comp) {
    auto coeff = fourier_coefficients(f, comp);
    for (std::size_t c = 0; c < coeff.size(); ++c) s += std::norm(coeff[c]) * weight[c];
  }
  return std::sqrt(s * grid.volume());
}

double neg_sobolev_norm(const Field& f, int m) {
  if (m <= f.grid().dim + 1) throw std::domain_error("neg_sobolev_norm: order must exceed d + 1");
  return fourier_sobolev_norm(f, -static_cast<double>(m));
}

double neg_sobolev_norm(std::span<const Field> series, std::span<const double> times, int m) {
  if (series.size() != times.size()) throw ShapeError("neg_sobolev_norm: series/time length mismatch");
  if (series.empty()) return 0.0;
  if (series.size() == 1) return neg_sobolev_norm(series[0], m);
  std::vector<double> sq(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    double v = neg_sobolev_norm(series[k], m);
    sq[k] = v * v;
  }
  return std::sqrt(trapezoid(times, sq));
}

Field restrict_or_prolong(const Field& f, const GridSpec& target) {
  const auto& src = f.grid();
  if (src.dim != target.dim || src.period != target.period)
    throw ShapeError("restrict_or_prolong: grids differ in dimension or period");
  if (src.n == target.n) return f;
  const int comps = f.components();
  Field out(target, comps);
  if (src.n > target.n) {
    if (src.n % target.n != 0) throw ShapeError("restrict_or_prolong: grids are not nested");
    const int ratio = src.n / target.n;
    const double inv = 1.0 / std::pow(static_cast<double>(ratio), src.dim);
    for (std::size_t c = 0; c < src.cells(); ++c) {
      auto idx = src.index(c);
      std::array<int, 2> coarse{idx[0] / ratio, src.dim == 2 ? idx[1] / ratio : 0};
      std::size_t tc = target.cell(coarse);
      for (int k = 0; k < comps; ++k) out(tc, k) += f(c, k) * inv;
    }
  } else {
    if (target.n % src.n != 0) throw ShapeError("restrict_or_prolong: grids are not nested");
    const int ratio = target.n / src.n;
    for (std::size_t c = 0; c < target.cells(); ++c) {
      auto idx = target.index(c);
      std::array<int, 2> coarse{idx[0] / ratio, target.dim == 2 ? idx[1] / ratio : 0};
      std::size_t sc = src.cell(coarse);
      for (int k = 0; k < comps; ++k) out(c, k) = f(sc, k);
    }
  }
  return out;
}

double trapezoid(std::span<const double> times, std::span<const double> samples) {
  if (times.size() != samples.size()) throw ShapeError("trapezoid: length mismatch");
  double s = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) s += 0.5 * (times[k] - times[k - 1]) * (samples[k] + samples[k - 1]);
  return s;
}

void write_field_csv(std::ostream& os, const Field& f) {
  const auto& g = f.grid();
  auto old_precision = os.precision(17);
  os << "d,n,period,components\n" << g.dim << ',' << g.n << ',' << g.period << ',' << f.components() << '\n';
  for (std::size_t c = 0; c < f.cells(); ++c) {
    for (int k = 0; k < f.components(); ++k) os << (k ? "," : "") << f(c, k);
    os << '\n';
  }
  os.precision(old_precision);
}

Field read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("d,n,period,components", 0) != 0)
    throw std::runtime_error("read_field_csv: missing header");
  if (!std::getline(is, line)) throw std::runtime_error("read_field_csv: missing grid line");
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream head(line);
  int d = 0, n = 0, comps = 0;
  double period = 0.0;
  if (!(head >> d >> n >> period >> comps)) throw std::runtime_error("read_field_csv: bad grid line");
  GridSpec grid(d, n, period);
  std::vector<double> values;
  values.reserve(grid.cells() * comps);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double v;
    while (row >> v) values.push_back(v);
  }
  return Field(grid, comps, std::move(values));
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary snapshot format assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("read_field_binary: truncated");
  return v;
}

} // namespace

void write_field_binary(std::ostream& os, const Field& f) {
  os.write("NSQF", 4);
  put<std::int32_t>(os, f.grid().dim);
  put<std::int32_t>(os, f.grid().n);
  put<double>(os, f.grid().period);
  put<std::int32_t>(os, f.components());
  auto v = f.values();
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Field read_field_binary(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "NSQF") throw std::runtime_error("read_field_binary: bad magic");
  int d = get<std::int32_t>(is);
  int n = get<std::int32_t>(is);
  double period = get<double>(is);
  int comps = get<std::int32_t>(is);
  GridSpec grid(d, n, period);
  std::vector<double> values(grid.cells() * comps);
  if (!is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double))))
    throw std::runtime_error("read_field_binary: truncated");
  return Field(grid, comps, std::move(values));
}

} // namespace nsuq
