#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace whlab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Smallest n' >= n whose prime factors are all in {2, 3, 5, 7}.
inline std::size_t fast_length(std::size_t n) {
  if (n <= 2) return 2;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

struct Grid {
  double origin = 0.0;
  double step = 1.0;
  std::size_t count = 2;

  Grid() = default;
  Grid(double origin_, double step_, std::size_t count_) : origin(origin_), step(step_), count(count_) {
    if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(origin))
      throw InvalidInput("grid step must be positive and finite");
    if (count < 2) throw InvalidInput("grid needs at least two samples");
  }

  // Grid starting at origin that covers at least `span`, with an FFT-friendly count.
  static Grid covering(double origin, double step, double span) {
    if (!(span > 0.0)) throw InvalidInput("grid span must be positive");
    auto n = static_cast<std::size_t>(std::ceil(span / step - 1e-9)) + 1;
    return Grid(origin, step, fast_length(n));
  }

  // Grid of nodes k*step (k integer) covering [lo, hi].
  static Grid aligned(double lo, double hi, double step) {
    double k0 = std::floor(lo / step + 1e-9);
    double k1 = std::ceil(hi / step - 1e-9);
    auto n = static_cast<std::size_t>(std::max(1.0, k1 - k0)) + 1;
    return Grid(k0 * step, step, n);
  }

  double at(std::size_t i) const { return origin + step * static_cast<double>(i); }
  double span() const { return step * static_cast<double>(count - 1); }
  double end() const { return at(count - 1); }

  // Spectral grid: step 2pi/(N h), nodes -pi/h + k*2pi/(N h).
  Grid frequency_grid() const {
    const double pi = std::numbers::pi;
    return Grid(-pi / step, 2.0 * pi / (static_cast<double>(count) * step), count);
  }

  // Index of x when x is (within tol steps) a node.
  std::optional<std::ptrdiff_t> node_offset(double x, double tol = 1e-7) const {
    double k = (x - origin) / step;
    double r = std::round(k);
    if (std::abs(k - r) > tol * std::max(1.0, std::abs(r) * 1e-3)) return std::nullopt;
    return static_cast<std::ptrdiff_t>(r);
  }

  std::size_t nearest(double x) const {
    double k = std::round((x - origin) / step);
    if (k < 0) return 0;
    if (k > static_cast<double>(count - 1)) return count - 1;
    return static_cast<std::size_t>(k);
  }

  bool same_step(const Grid& o) const { return std::abs(step - o.step) <= 1e-12 * step; }

  // Whether o's nodes coincide with nodes of the lattice extending this grid.
  bool aligned_with(const Grid& o) const {
    if (!same_step(o)) return false;
    double k = (o.origin - origin) / step;
    return std::abs(k - std::round(k)) < 1e-7;
  }
};

inline bool operator==(const Grid& a, const Grid& b) {
  return a.count == b.count && a.same_step(b) && std::abs(a.origin - b.origin) <= 1e-12 * std::max(1.0, a.step);
}

inline void require_finite(const CVec& v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) {
      std::ostringstream os;
      os << what << ": non-finite value at sample " << i;
      throw InvalidInput(os.str());
    }
  }
}

struct SampledFunction {
  Grid grid;
  CVec values;

  SampledFunction() = default;
  SampledFunction(Grid g, CVec v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.count) throw InvalidInput("sample count does not match grid");
    require_finite(values, "sampled function");
  }
  explicit SampledFunction(Grid g) : grid(g), values(g.count, cplx(0.0)) {}

  static SampledFunction sample(const Grid& g, const std::function<cplx(double)>& fn) {
    CVec v(g.count);
    for (std::size_t i = 0; i < g.count; ++i) v[i] = fn(g.at(i));
    return SampledFunction(g, std::move(v));
  }

  std::size_t size() const { return values.size(); }
  const cplx& operator[](std::size_t i) const { return values[i]; }
  double x(std::size_t i) const { return grid.at(i); }

  double max_abs() const {
    double m = 0.0;
    for (auto& v : values) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_zero() const {
    for (auto& v : values)
      if (v != cplx(0.0)) return false;
    return true;
  }

  // Value at an arbitrary lattice point; zero off the grid.
  cplx at_node(std::ptrdiff_t k) const {
    if (k < 0 || k >= static_cast<std::ptrdiff_t>(values.size())) return 0.0;
    return values[static_cast<std::size_t>(k)];
  }

  // Zero-padded on the right up to `count` samples.
  SampledFunction padded_to(std::size_t count) const {
    if (count < grid.count) throw InvalidInput("padding cannot shrink a grid");
    CVec v = values;
    v.resize(count, cplx(0.0));
    return SampledFunction(Grid(grid.origin, grid.step, count), std::move(v));
  }

  // Restriction or zero-extension onto another grid of the same lattice.
  SampledFunction resampled_onto(const Grid& g) const {
    if (!grid.aligned_with(g)) throw InvalidInput("grids do not share a lattice");
    auto off = static_cast<std::ptrdiff_t>(std::llround((g.origin - grid.origin) / grid.step));
    CVec v(g.count);
    for (std::size_t i = 0; i < g.count; ++i) v[i] = at_node(static_cast<std::ptrdiff_t>(i) + off);
    return SampledFunction(g, std::move(v));
  }
};

inline SampledFunction operator+(const SampledFunction& a, const SampledFunction& b) {
  if (!(a.grid == b.grid)) throw InvalidInput("grids differ");
  CVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] + b.values[i];
  return SampledFunction(a.grid, std::move(v));
}

inline SampledFunction operator-(const SampledFunction& a, const SampledFunction& b) {
  if (!(a.grid == b.grid)) throw InvalidInput("grids differ");
  CVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] - b.values[i];
  return SampledFunction(a.grid, std::move(v));
}

inline SampledFunction operator*(cplx c, const SampledFunction& a) {
  CVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * a.values[i];
  return SampledFunction(a.grid, std::move(v));
}

// Samples of a transform on a frequency grid. spatial_origin records where the
// spatial samples started so that the inverse lands on the right window.
struct FrequencyFunction {
  Grid freq_grid;
  double spatial_origin = 0.0;
  CVec values;

  FrequencyFunction() = default;
  FrequencyFunction(Grid g, double x0, CVec v) : freq_grid(g), spatial_origin(x0), values(std::move(v)) {
    if (values.size() != freq_grid.count) throw InvalidInput("sample count does not match frequency grid");
    require_finite(values, "frequency function");
  }

  std::size_t size() const { return values.size(); }
  double xi(std::size_t k) const { return freq_grid.at(k); }
  double spatial_step() const {
    return 2.0 * std::numbers::pi / (static_cast<double>(freq_grid.count) * freq_grid.step);
  }
  Grid spatial_grid() const { return Grid(spatial_origin, spatial_step(), freq_grid.count); }

  double max_abs() const {
    double m = 0.0;
    for (auto& v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

}  // namespace whlab
