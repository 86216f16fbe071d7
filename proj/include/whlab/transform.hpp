#pragma once

#include <cfloat>
#include <cmath>
#include <sstream>

#include "fft.hpp"
#include "grid.hpp"

namespace whlab {

// log(DBL_MAX); exponents above this overflow.
inline constexpr double kLogMax = 709.782712893384;

// Convention: f^(xi) = int f(x) e^{-i xi x} dx, approximated by h * sum_j.
inline FrequencyFunction forward_transform(const SampledFunction& f) {
  require_finite(f.values, "forward_transform input");
  const Grid& g = f.grid;
  const Grid fg = g.frequency_grid();
  const std::size_t n = g.count;
  CVec data(n);
  for (std::size_t j = 0; j < n; ++j) data[j] = (j % 2 == 0) ? f.values[j] : -f.values[j];
  fft::forward(data);
  for (std::size_t k = 0; k < n; ++k) {
    double phase = -fg.at(k) * g.origin;
    data[k] *= g.step * std::polar(1.0, phase);
  }
  return FrequencyFunction(fg, g.origin, std::move(data));
}

inline SampledFunction inverse_transform(const FrequencyFunction& F) {
  require_finite(F.values, "inverse_transform input");
  const Grid sg = F.spatial_grid();
  const std::size_t n = F.size();
  CVec data(n);
  for (std::size_t k = 0; k < n; ++k) data[k] = F.values[k] * std::polar(1.0, F.xi(k) * sg.origin);
  fft::backward(data);
  const double scale = 1.0 / (static_cast<double>(n) * sg.step);
  for (std::size_t j = 0; j < n; ++j) data[j] *= (j % 2 == 0) ? scale : -scale;
  return SampledFunction(sg, std::move(data));
}

namespace detail {

// e^{s} * v with the magnitude formed in log space.
inline cplx scaled(cplx v, double s, std::size_t index, double x, const char* what) {
  if (v == cplx(0.0)) return 0.0;
  double lm = s + std::log(std::abs(v));
  if (lm > kLogMax) {
    std::ostringstream os;
    os << what << ": overflow at sample " << index << " (x = " << x << ", log magnitude " << lm << ")";
    throw OverflowError(os.str());
  }
  return std::exp(lm) * (v / std::abs(v));
}

}  // namespace detail

// (f)_a(x) = e^{ax} f(x)
inline SampledFunction twist(const SampledFunction& f, double a) {
  if (a == 0.0) return f;
  CVec v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = f.x(i);
    v[i] = detail::scaled(f.values[i], a * x, i, x, "twist");
  }
  return SampledFunction(f.grid, std::move(v));
}

// phi^(z) for complex z by the same Riemann rule as forward_transform.
inline cplx strip_eval(const SampledFunction& phi, cplx z) {
  const double xi = z.real();
  const double eta = z.imag();
  cplx sum = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    if (phi.values[j] == cplx(0.0)) continue;
    double x = phi.x(j);
    sum += detail::scaled(phi.values[j], eta * x, j, x, "strip_eval") * std::polar(1.0, -xi * x);
  }
  sum *= phi.grid.step;
  if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag()))
    throw OverflowError("strip_eval: sum overflowed");
  return sum;
}

}  // namespace whlab
