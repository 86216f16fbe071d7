#pragma once

#include <cmath>
#include <numbers>
#include <sstream>

#include "grid.hpp"

namespace whlab::kernels {

// Standard bump exp(-1/(1-u^2)) on |u| < 1.
inline double bump_profile(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

// amplitude * exp(-(x-c)^2 / (2 width^2)), sampled on k*h nodes over c +- cutoff*width.
inline SampledFunction gaussian(double h, double center = 0.0, double width = 1.0, double amplitude = 1.0,
                                double cutoff = 9.0) {
  if (!(width > 0.0)) throw InvalidInput("gaussian width must be positive");
  Grid g = Grid::aligned(center - cutoff * width, center + cutoff * width, h);
  return SampledFunction::sample(g, [&](double x) {
    double u = (x - center) / width;
    return cplx(amplitude * std::exp(-0.5 * u * u));
  });
}

inline SampledFunction bump(double h, double center, double radius, double amplitude = 1.0) {
  if (!(radius > 0.0)) throw InvalidInput("bump radius must be positive");
  Grid g = Grid::aligned(center - radius, center + radius, h);
  return SampledFunction::sample(g, [&](double x) { return cplx(amplitude * bump_profile((x - center) / radius)); });
}

namespace detail {

inline SampledFunction unit_mass(SampledFunction f) {
  cplx mass = 0.0;
  for (auto& v : f.values) mass += v;
  mass *= f.grid.step;
  if (std::abs(mass) == 0.0) throw ScaleError("kernel has no mass on the grid");
  for (auto& v : f.values) v /= mass;
  return f;
}

}  // namespace detail

// Bump of total width `width` centered at `center`, normalized to unit
// discrete mass. Widths below two grid steps give the discrete unit spike.
inline SampledFunction mollified_delta(double h, double center, double width) {
  if (width < 2.0 * h) {
    double k = std::round(center / h);
    Grid g((k - 1.0) * h, h, 3);
    return SampledFunction(g, CVec{0.0, 1.0 / h, 0.0});
  }
  return detail::unit_mass(bump(h, center, 0.5 * width));
}

// theta_n: positive, unit discrete mass, supported in [0, 1/n].
inline SampledFunction mollifier(double h, int n) {
  if (n < 1) throw InvalidInput("mollifier scale must be >= 1");
  double len = 1.0 / n;
  auto nodes = static_cast<long>(std::floor(len / h + 1e-9));
  if (nodes - 1 < 3) {
    std::ostringstream os;
    os << "mollifier theta_" << n << " has " << std::max(0L, nodes - 1) << " interior nodes at step " << h
       << "; need at least 3";
    throw ScaleError(os.str());
  }
  Grid g(0.0, h, static_cast<std::size_t>(nodes) + 1);
  auto f = SampledFunction::sample(g, [&](double x) { return cplx(bump_profile(2.0 * x / len - 1.0)); });
  return detail::unit_mass(f);
}

// Fejer kernel gamma_n(x) = (1 - cos nx) / (pi n x^2), with value n/(2 pi) at 0.
inline double fejer(double x, double n) {
  double u = n * x;
  if (std::abs(u) < 1e-4) return n / (2.0 * std::numbers::pi) * (1.0 - u * u / 12.0);
  double s = std::sin(0.5 * u);
  return 2.0 * s * s / (std::numbers::pi * n * x * x);
}

// Triangular multiplier g_n(eta) = (1 - |eta/n|) on [-n, n].
inline double triangle(double eta, double n) {
  double t = 1.0 - std::abs(eta / n);
  return t > 0.0 ? t : 0.0;
}

}  // namespace whlab::kernels
