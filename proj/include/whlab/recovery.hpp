#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "kernels.hpp"
#include "operators.hpp"
#include "transform.hpp"

namespace whlab {

struct RecoverOptions {
  Grid grid;                 // R+ grid on which T is applied
  double y_lo = -5.0;        // kernel window [y_lo, y_hi]
  double y_hi = 5.0;
  std::size_t stride = 1;    // output spacing in grid steps
  std::optional<double> x0_alt;  // second probe position; default x0 + 1
  double stationarity_tol = 1e-4;
};

struct RecoveredKernel {
  SampledFunction kernel;        // phi_n = mu_T * theta_n on [y_lo, y_hi]
  SampledFunction mollifier;     // theta_n on the probing grid
  double stationarity = 0.0;     // max |phi_n(x0) - phi_n(x0')| / max |phi_n|
  bool stationary = true;        // false -> T does not look Wiener-Hopf
  std::string warning;
};

namespace detail {

inline SampledFunction probe_kernel_at(const WienerHopfOperator& t, const SampledFunction& theta, double x0,
                                       const RecoverOptions& opt) {
  const Grid& g = opt.grid;
  const double h = g.step;
  auto k0 = g.node_offset(x0);
  if (!k0) throw AlignmentError("probe position x0 is not a grid node");
  auto ylo = static_cast<std::ptrdiff_t>(std::ceil(opt.y_lo / h - 1e-9));
  auto yhi = static_cast<std::ptrdiff_t>(std::floor(opt.y_hi / h + 1e-9));
  const auto stride = static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, opt.stride));
  const auto ng = static_cast<std::ptrdiff_t>(g.count);
  const auto nt = static_cast<std::ptrdiff_t>(theta.size());
  std::size_t count = static_cast<std::size_t>((yhi - ylo) / stride) + 1;
  if (count < 2) throw InvalidInput("kernel window too small");
  CVec out(count);
  SampledFunction p(g);
  for (std::size_t k = 0; k < count; ++k) {
    std::ptrdiff_t y = ylo + static_cast<std::ptrdiff_t>(k) * stride;
    std::ptrdiff_t s = *k0 - y;  // probe start index: theta translated to x0 - y
    if (s < 0 || s + nt > ng) {
      std::ostringstream os;
      os << "probe for kernel node y = " << static_cast<double>(y) * h << " at x0 = " << x0
         << " leaves the grid [" << g.origin << ", " << g.end() << "]";
      throw ProbeError(os.str());
    }
    std::fill(p.values.begin(), p.values.end(), cplx(0.0));
    for (std::ptrdiff_t j = 0; j < nt; ++j) p.values[static_cast<std::size_t>(s + j)] = theta.values[static_cast<std::size_t>(j)];
    out[k] = apply_wh(t, p).values[static_cast<std::size_t>(*k0)];
  }
  return SampledFunction(Grid(static_cast<double>(ylo) * h, h * static_cast<double>(stride), count), std::move(out));
}

}  // namespace detail

// phi_n(y) = (T S_{x0-y} theta_n)(x0), evaluated node by node, plus a second
// pass at x0' to check that the value no longer depends on the position.
inline RecoveredKernel recover_kernel(const WienerHopfOperator& t, int n, double x0, const RecoverOptions& opt) {
  RecoveredKernel r;
  r.mollifier = kernels::mollifier(opt.grid.step, n);
  r.kernel = detail::probe_kernel_at(t, r.mollifier, x0, opt);
  double x1 = opt.x0_alt ? *opt.x0_alt : x0 + 1.0;
  SampledFunction alt = detail::probe_kernel_at(t, r.mollifier, x1, opt);
  double diff = 0.0;
  for (std::size_t i = 0; i < alt.size(); ++i) diff = std::max(diff, std::abs(alt.values[i] - r.kernel.values[i]));
  double scale = r.kernel.max_abs();
  r.stationarity = scale > 0.0 ? diff / scale : diff;
  r.stationary = r.stationarity <= opt.stationarity_tol;
  if (!r.stationary) {
    std::ostringstream os;
    os << "recovered kernel changes by " << r.stationarity << " between x0 = " << x0 << " and x0 = " << x1
       << "; the operator does not behave like a Wiener-Hopf operator";
    r.warning = os.str();
  }
  return r;
}

// Response of T to the discrete unit spike at x0, read back on the kernel
// lattice `window` (nodes y with x0 + y on the grid). Exact for lattice
// convolutions; one application of T.
inline SampledFunction impulse_kernel(const WienerHopfOperator& t, const Grid& grid, double x0, const Grid& window) {
  const double h = grid.step;
  if (!window.same_step(grid)) throw InvalidInput("impulse window step differs from the grid step");
  auto k0 = grid.node_offset(x0);
  if (!k0 || *k0 < 0 || *k0 >= static_cast<std::ptrdiff_t>(grid.count)) throw AlignmentError("impulse position is not a grid node");
  auto y0 = window.node_offset(0.0);
  if (!y0) throw AlignmentError("impulse window is not on the grid lattice");
  const std::ptrdiff_t first = *k0 - *y0;
  if (first < 0 || first + static_cast<std::ptrdiff_t>(window.count) > static_cast<std::ptrdiff_t>(grid.count)) {
    std::ostringstream os;
    os << "impulse window [" << window.origin << ", " << window.end() << "] around x0 = " << x0
       << " leaves the grid [" << grid.origin << ", " << grid.end() << "]";
    throw ProbeError(os.str());
  }
  SampledFunction spike(grid);
  spike.values[static_cast<std::size_t>(*k0)] = 1.0 / h;
  SampledFunction r = apply_wh(t, spike, ConvolutionMethod::direct);
  CVec v(window.count);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = r.values[static_cast<std::size_t>(first) + i];
  return SampledFunction(window, std::move(v));
}

// Kernel of a shift by a: discrete unit mass at a.
inline SampledFunction shift_kernel(double a, double h) {
  double k = std::round(a / h);
  if (std::abs(a / h - k) > 1e-9 * std::max(1.0, std::abs(k))) throw AlignmentError("shift not on grid");
  return SampledFunction(Grid((k - 1.0) * h, h, 3), CVec{0.0, 1.0 / h, 0.0});
}

enum class FejerMode {
  kernel_window,  // kernel times g_n, i.e. symbol smoothed by gamma_n
  symbol_window,  // symbol times g_n, i.e. kernel convolved with gamma_n
};

struct FejerOptions {
  FejerMode mode = FejerMode::kernel_window;
  double pad = 200.0;  // symbol_window: half-width of the periodic kernel grid
  std::optional<RecoverOptions> recover;  // black-box operators
  int recover_scale = 100;
  double recover_x0 = 0.0;
};

inline SampledFunction kernel_of(const WienerHopfOperator& t, double h, const FejerOptions& opt = {}) {
  switch (t.kind) {
    case WienerHopfOperator::Kind::kernel: return t.phi;
    case WienerHopfOperator::Kind::shift: return shift_kernel(t.shift, h);
    case WienerHopfOperator::Kind::black_box:
      if (!opt.recover) throw InvalidInput("black-box operator needs recovery options");
      return recover_kernel(t, opt.recover_scale, opt.recover_x0, *opt.recover).kernel;
  }
  return t.phi;
}

// Y_n from the Fejer summation: T_{phi g_n} (default) or the operator whose
// level-0 symbol is g_n times the original one.
inline WienerHopfOperator fejer_approximant(const WienerHopfOperator& t, int n, double h, const FejerOptions& opt = {}) {
  if (n < 1) throw InvalidInput("Fejer index must be >= 1");
  SampledFunction phi = kernel_of(t, h, opt);
  const double nn = static_cast<double>(n);
  std::ostringstream name;
  name << "fejer_" << n << "(" << t.name << ")";
  if (opt.mode == FejerMode::kernel_window) {
    CVec v(phi.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = phi.values[i] * kernels::triangle(phi.x(i), nn);
    return WienerHopfOperator::kernel(SampledFunction(phi.grid, std::move(v)), t.space, name.str());
  }
  Grid wide = Grid::covering(std::floor((-opt.pad) / phi.grid.step) * phi.grid.step, phi.grid.step,
                             2.0 * opt.pad + phi.grid.span());
  FrequencyFunction F = forward_transform(phi.resampled_onto(wide));
  for (std::size_t k = 0; k < F.size(); ++k) F.values[k] *= kernels::triangle(F.xi(k), nn);
  return WienerHopfOperator::kernel(inverse_transform(F), t.space, name.str());
}

}  // namespace whlab
