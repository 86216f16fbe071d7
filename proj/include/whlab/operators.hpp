#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"
#include "spaces.hpp"
#include "transform.hpp"

namespace whlab {

// S_a for a > 0 (zero-fill on [0, a)), S_{-|a|} for a < 0 (drop the left part).
// a must be a multiple of the grid step.
inline SampledFunction apply_shift(const SampledFunction& f, double a) {
  const double h = f.grid.step;
  double k = a / h;
  double r = std::round(k);
  if (std::abs(k - r) > 1e-9 * std::max(1.0, std::abs(r))) {
    std::ostringstream os;
    os << "shift " << a << " is not a multiple of the grid step " << h;
    throw AlignmentError(os.str());
  }
  auto m = static_cast<std::ptrdiff_t>(r);
  CVec v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.at_node(static_cast<std::ptrdiff_t>(i) - m);
  return SampledFunction(f.grid, std::move(v));
}

// Gamma_a f(x) = e^{iax} f(x)
inline SampledFunction apply_modulation(const SampledFunction& f, double a) {
  CVec v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.values[i] * std::polar(1.0, a * f.x(i));
  return SampledFunction(f.grid, std::move(v));
}

struct WienerHopfOperator {
  enum class Kind { kernel, shift, black_box };
  using ApplyFn = std::function<SampledFunction(const SampledFunction&)>;

  Kind kind = Kind::kernel;
  SampledFunction phi;  // kernel samples (Kind::kernel)
  double shift = 0.0;   // Kind::shift
  ApplyFn apply;        // Kind::black_box
  SpaceSpec space = SpaceSpec::lp(2.0);
  std::string name;

  static WienerHopfOperator kernel(SampledFunction phi, SpaceSpec space = SpaceSpec::lp(2.0),
                                   std::string name = "kernel") {
    WienerHopfOperator t;
    t.kind = Kind::kernel;
    t.phi = std::move(phi);
    t.space = std::move(space);
    t.name = std::move(name);
    return t;
  }
  static WienerHopfOperator shift_by(double a, SpaceSpec space = SpaceSpec::lp(2.0)) {
    WienerHopfOperator t;
    t.kind = Kind::shift;
    t.shift = a;
    t.space = std::move(space);
    std::ostringstream os;
    os << "shift(" << a << ")";
    t.name = os.str();
    return t;
  }
  static WienerHopfOperator black_box(ApplyFn fn, SpaceSpec space = SpaceSpec::lp(2.0),
                                      std::string name = "black_box") {
    WienerHopfOperator t;
    t.kind = Kind::black_box;
    t.apply = std::move(fn);
    t.space = std::move(space);
    t.name = std::move(name);
    return t;
  }
  static WienerHopfOperator identity(SpaceSpec space = SpaceSpec::lp(2.0)) {
    return black_box([](const SampledFunction& f) { return f; }, std::move(space), "identity");
  }
  // Wraps an operator so that only its action is visible.
  static WienerHopfOperator as_black_box(const WienerHopfOperator& t);
};

enum class ConvolutionMethod { automatic, fft, direct };

namespace detail {

inline std::ptrdiff_t kernel_offset(const SampledFunction& phi, const Grid& g) {
  if (!phi.grid.same_step(g)) {
    std::ostringstream os;
    os << "kernel step " << phi.grid.step << " differs from grid step " << g.step;
    throw InvalidInput(os.str());
  }
  double k = phi.grid.origin / g.step;
  double r = std::round(k);
  if (std::abs(k - r) > 1e-7) throw AlignmentError("kernel grid origin is not a multiple of the step");
  double kf = g.origin / g.step;
  if (std::abs(kf - std::round(kf)) > 1e-7) throw AlignmentError("function grid origin is not a multiple of the step");
  return static_cast<std::ptrdiff_t>(r);
}

inline void check_half_line(const SampledFunction& f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.x(i) < -1e-12 && f.values[i] != cplx(0.0)) {
      std::ostringstream os;
      os << "input has mass at x = " << f.x(i) << " < 0; move the grid into R+";
      throw SupportError(os.str());
    }
  }
}

}  // namespace detail

// P+(phi * f) on f's grid.
inline SampledFunction convolve_truncate(const SampledFunction& phi, const SampledFunction& f,
                                         ConvolutionMethod method = ConvolutionMethod::automatic) {
  detail::check_half_line(f);
  const std::ptrdiff_t m = detail::kernel_offset(phi, f.grid);
  const double h = f.grid.step;
  const auto nf = static_cast<std::ptrdiff_t>(f.size());
  const auto np = static_cast<std::ptrdiff_t>(phi.size());
  if (method == ConvolutionMethod::automatic)
    method = (static_cast<double>(nf) * static_cast<double>(np) <= 2e6) ? ConvolutionMethod::direct
                                                                         : ConvolutionMethod::fft;
  CVec out(f.size(), cplx(0.0));
  std::vector<std::ptrdiff_t> nz;
  if (method == ConvolutionMethod::direct) {
    for (std::ptrdiff_t s = 0; s < nf && static_cast<std::ptrdiff_t>(nz.size()) * 4 < nf; ++s)
      if (f.values[static_cast<std::size_t>(s)] != cplx(0.0)) nz.push_back(s);
    if (static_cast<std::ptrdiff_t>(nz.size()) * 4 >= nf) nz.clear();
  }
  if (method == ConvolutionMethod::direct && !nz.empty()) {
    // sparse input (spikes, narrow probes): scatter each non-zero sample
    for (std::ptrdiff_t s : nz) {
      const cplx fs = h * f.values[static_cast<std::size_t>(s)];
      std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -s - m), hi = std::min(np, nf - s - m);
      for (std::ptrdiff_t j = lo; j < hi; ++j) out[static_cast<std::size_t>(s + j + m)] += phi.values[static_cast<std::size_t>(j)] * fs;
    }
  } else if (method == ConvolutionMethod::direct) {
    // out_i = h sum_j phi_j f_{i - j - m}
    for (std::ptrdiff_t j = 0; j < np; ++j) {
      const cplx pj = phi.values[static_cast<std::size_t>(j)] * h;
      if (pj == cplx(0.0)) continue;
      std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, j + m), hi = std::min(nf, nf + j + m);
      for (std::ptrdiff_t i = lo; i < hi; ++i) out[static_cast<std::size_t>(i)] += pj * f.values[static_cast<std::size_t>(i - j - m)];
    }
  } else {
    CVec c = fft::linear_convolution(phi.values, f.values);
    const auto nc = static_cast<std::ptrdiff_t>(c.size());
    for (std::ptrdiff_t i = 0; i < nf; ++i) {
      std::ptrdiff_t s = i - m;
      if (s >= 0 && s < nc) out[static_cast<std::size_t>(i)] = h * c[static_cast<std::size_t>(s)];
    }
  }
  return SampledFunction(f.grid, std::move(out));
}

inline SampledFunction apply_wh(const WienerHopfOperator& t, const SampledFunction& f,
                                ConvolutionMethod method = ConvolutionMethod::automatic) {
  switch (t.kind) {
    case WienerHopfOperator::Kind::kernel: return convolve_truncate(t.phi, f, method);
    case WienerHopfOperator::Kind::shift: return apply_shift(f, t.shift);
    case WienerHopfOperator::Kind::black_box: {
      SampledFunction r = t.apply(f);
      if (!(r.grid == f.grid)) throw InvalidInput("black-box operator changed the grid");
      return r;
    }
  }
  return f;
}

inline WienerHopfOperator WienerHopfOperator::as_black_box(const WienerHopfOperator& t) {
  WienerHopfOperator inner = t;
  return black_box([inner](const SampledFunction& f) { return apply_wh(inner, f); }, t.space,
                   "black_box(" + t.name + ")");
}

// max over probes and shifts of ||S_{-a} T S_a f - T f|| / ||f|| in T's space.
// Direct convolution by default: FFT roundoff is amplified by growing weights.
inline double commutation_defect(const WienerHopfOperator& t, const std::vector<SampledFunction>& probes,
                                 const std::vector<double>& shifts = {0.25, 1.0, 3.0},
                                 ConvolutionMethod method = ConvolutionMethod::direct) {
  double worst = 0.0;
  for (const auto& f : probes) {
    double nf = t.space.norm(f);
    if (nf == 0.0) continue;
    SampledFunction tf = apply_wh(t, f, method);
    for (double a : shifts) {
      SampledFunction g = apply_shift(apply_wh(t, apply_shift(f, a), method), -a);
      worst = std::max(worst, t.space.norm(g - tf) / nf);
    }
  }
  return worst;
}

// ---------------------------------------------------------------- finite sections

struct Interval {
  double lo = 0.0, hi = 0.0;
};

struct FiniteSection {
  Eigen::MatrixXcd matrix;  // acts on sqrt(h) omega-weighted samples
  Grid input_grid, output_grid;
};

namespace detail {

inline Grid window_grid(const Grid& g, Interval w) {
  if (!(w.hi > w.lo)) throw InvalidInput("empty window");
  if (w.lo < g.origin - 1e-9 || w.hi > g.end() + 1e-9) throw InvalidInput("window leaves the grid");
  std::size_t a = static_cast<std::size_t>(std::ceil((w.lo - g.origin) / g.step - 1e-9));
  std::size_t b = static_cast<std::size_t>(std::floor((w.hi - g.origin) / g.step + 1e-9));
  if (b <= a) throw InvalidInput("window contains fewer than two nodes");
  return Grid(g.at(a), g.step, b - a + 1);
}

}  // namespace detail

// Compression of T to in_window -> out_window on the lattice of `grid`, in
// L^2_omega coordinates (omega from T's space).
inline FiniteSection finite_section(const WienerHopfOperator& t, Interval in_window, Interval out_window,
                                    const Grid& grid) {
  FiniteSection s;
  s.input_grid = detail::window_grid(grid, in_window);
  s.output_grid = detail::window_grid(grid, out_window);
  const Weight& w = t.space.weight;
  const std::size_t ni = s.input_grid.count, no = s.output_grid.count;
  std::vector<double> lin(ni), lout(no);
  for (std::size_t j = 0; j < ni; ++j) lin[j] = w.log_value(s.input_grid.at(j));
  for (std::size_t i = 0; i < no; ++i) lout[i] = w.log_value(s.output_grid.at(i));
  const double h = grid.step;
  auto in_off = static_cast<std::ptrdiff_t>(std::llround(s.input_grid.origin / h));
  auto out_off = static_cast<std::ptrdiff_t>(std::llround(s.output_grid.origin / h));
  s.matrix = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(no), static_cast<Eigen::Index>(ni));

  auto put = [&](std::size_t i, std::size_t j, cplx k) {
    if (k == cplx(0.0)) return;
    double e = lout[i] - lin[j];
    if (e > kLogMax) throw OverflowError("finite_section: weight ratio overflows");
    s.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(e) * k;
  };

  switch (t.kind) {
    case WienerHopfOperator::Kind::kernel: {
      const std::ptrdiff_t m = detail::kernel_offset(t.phi, grid);
      for (std::size_t i = 0; i < no; ++i)
        for (std::size_t j = 0; j < ni; ++j) {
          // x_i - y_j on the lattice, then kernel index
          std::ptrdiff_t d = (out_off + static_cast<std::ptrdiff_t>(i)) - (in_off + static_cast<std::ptrdiff_t>(j));
          put(i, j, h * t.phi.at_node(d - m));
        }
      break;
    }
    case WienerHopfOperator::Kind::shift: {
      double k = t.shift / h;
      if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, std::abs(k))) throw AlignmentError("shift not on grid");
      auto ms = static_cast<std::ptrdiff_t>(std::llround(k));
      for (std::size_t j = 0; j < ni; ++j) {
        std::ptrdiff_t i = in_off + static_cast<std::ptrdiff_t>(j) + ms - out_off;
        if (i >= 0 && i < static_cast<std::ptrdiff_t>(no) && in_off + static_cast<std::ptrdiff_t>(j) + ms >= 0)
          put(static_cast<std::size_t>(i), j, 1.0);
      }
      break;
    }
    case WienerHopfOperator::Kind::black_box: {
      SampledFunction e(grid);
      auto gin = static_cast<std::ptrdiff_t>(std::llround((s.input_grid.origin - grid.origin) / h));
      auto gout = static_cast<std::ptrdiff_t>(std::llround((s.output_grid.origin - grid.origin) / h));
      for (std::size_t j = 0; j < ni; ++j) {
        std::fill(e.values.begin(), e.values.end(), cplx(0.0));
        e.values[static_cast<std::size_t>(gin) + j] = 1.0;
        SampledFunction r = apply_wh(t, e);
        for (std::size_t i = 0; i < no; ++i) put(i, j, r.values[static_cast<std::size_t>(gout) + i]);
      }
      break;
    }
  }
  return s;
}

}  // namespace whlab
