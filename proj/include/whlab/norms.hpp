#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "operators.hpp"
#include "spaces.hpp"

namespace whlab {

struct NormOptions {
  double initial_window = 16.0;
  double rel_tol = 1e-3;        // window-ladder convergence
  std::size_t settle_steps = 2; // consecutive doublings that must stay within rel_tol
  std::size_t max_dense = 2048; // largest black-box section assembled densely
  std::size_t probes = 64;      // random probes for p != 2
  std::uint64_t seed = 7;
  linalg::LanczosOptions lanczos;
};

struct NormLadderStep {
  double window = 0.0;
  double value = 0.0;
};

struct OperatorNormResult {
  double value = 0.0;
  bool lower_bound = false;  // true on the random-probe path
  bool converged = false;
  std::vector<NormLadderStep> ladder;
};

namespace detail {

// Largest singular value of the square L^2_omega section of T on [0, L].
inline double section_norm(const WienerHopfOperator& t, const Grid& grid, double L, const NormOptions& opt) {
  const Weight& w = t.space.weight;
  const double h = grid.step;
  Grid win = detail::window_grid(grid, Interval{grid.origin, L});
  const std::size_t n = win.count;
  std::vector<double> lw(n);
  for (std::size_t i = 0; i < n; ++i) lw[i] = w.log_value(win.at(i));

  if (t.kind == WienerHopfOperator::Kind::shift) {
    double k = t.shift / h;
    auto m = static_cast<std::ptrdiff_t>(std::llround(k));
    if (std::abs(k - static_cast<double>(m)) > 1e-9 * std::max(1.0, std::abs(k)))
      throw AlignmentError("shift not on grid");
    // one non-zero per column: the singular values are the stripe moduli
    double best = -INFINITY;
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
      std::ptrdiff_t i = j + m;
      if (i >= 0 && i < static_cast<std::ptrdiff_t>(n)) best = std::max(best, lw[static_cast<std::size_t>(i)] - lw[static_cast<std::size_t>(j)]);
    }
    if (!std::isfinite(best)) return 0.0;
    if (best > kLogMax) throw OverflowError("shift section norm overflows");
    return std::exp(best);
  }

  if (t.kind == WienerHopfOperator::Kind::kernel) {
    const std::ptrdiff_t m = detail::kernel_offset(t.phi, grid);
    const auto np = static_cast<std::ptrdiff_t>(t.phi.size());
    const auto nn = static_cast<std::ptrdiff_t>(n);
    // row i holds A(i, j) for j = i - m - d, d = 0..np-1
    std::vector<cplx> band(n * static_cast<std::size_t>(np), cplx(0.0));
    for (std::ptrdiff_t i = 0; i < nn; ++i)
      for (std::ptrdiff_t d = 0; d < np; ++d) {
        std::ptrdiff_t j = i - m - d;
        if (j < 0 || j >= nn) continue;
        cplx k = h * t.phi.values[static_cast<std::size_t>(d)];
        if (k == cplx(0.0)) continue;
        double e = lw[static_cast<std::size_t>(i)] - lw[static_cast<std::size_t>(j)];
        if (e > kLogMax) throw OverflowError("weighted section entry overflows");
        band[static_cast<std::size_t>(i * np + d)] = std::exp(e) * k;
      }
    linalg::LinearMap a;
    a.rows = a.cols = n;
    a.apply = [&](const CVec& x, CVec& y) {
      y.assign(n, cplx(0.0));
      for (std::ptrdiff_t i = 0; i < nn; ++i) {
        cplx s = 0.0;
        const cplx* row = &band[static_cast<std::size_t>(i * np)];
        std::ptrdiff_t dlo = std::max<std::ptrdiff_t>(0, i - m - nn + 1), dhi = std::min(np - 1, i - m);
        for (std::ptrdiff_t d = dlo; d <= dhi; ++d) s += row[d] * x[static_cast<std::size_t>(i - m - d)];
        y[static_cast<std::size_t>(i)] = s;
      }
    };
    a.adjoint = [&](const CVec& x, CVec& y) {
      y.assign(n, cplx(0.0));
      for (std::ptrdiff_t i = 0; i < nn; ++i) {
        const cplx* row = &band[static_cast<std::size_t>(i * np)];
        std::ptrdiff_t dlo = std::max<std::ptrdiff_t>(0, i - m - nn + 1), dhi = std::min(np - 1, i - m);
        for (std::ptrdiff_t d = dlo; d <= dhi; ++d) y[static_cast<std::size_t>(i - m - d)] += std::conj(row[d]) * x[static_cast<std::size_t>(i)];
      }
    };
    return linalg::largest_singular_value(a, opt.lanczos).sigma_max;
  }

  FiniteSection s = finite_section(t, Interval{win.origin, win.end()}, Interval{win.origin, win.end()}, grid);
  return linalg::largest_singular_value(linalg::dense_map(s.matrix), opt.lanczos).sigma_max;
}

// Smooth random probe: a few modulated bumps inside [lo, hi].
inline SampledFunction random_probe(const Grid& grid, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampledFunction f(grid);
  int bumps = 1 + static_cast<int>(u(rng) * 3.0);
  for (int b = 0; b < bumps; ++b) {
    double r = 0.5 + 2.5 * u(rng);
    r = std::min(r, 0.45 * (hi - lo));
    double c = lo + r + u(rng) * std::max(0.0, hi - lo - 2.0 * r);
    double kappa = -3.0 + 6.0 * u(rng);
    cplx amp = std::polar(0.2 + u(rng), 2.0 * std::numbers::pi * u(rng));
    for (std::size_t i = 0; i < grid.count; ++i) {
      double x = grid.at(i);
      double uu = (x - c) / r;
      if (std::abs(uu) < 1.0) f.values[i] += amp * std::exp(-1.0 / (1.0 - uu * uu)) * std::polar(1.0, kappa * x);
    }
  }
  return f;
}

}  // namespace detail

// p = 2: largest singular value of growing L^2_omega sections until the
// relative change is <= rel_tol. Otherwise: random-probe lower bound.
inline OperatorNormResult operator_norm(const WienerHopfOperator& t, const Grid& grid, const NormOptions& opt = {}) {
  OperatorNormResult r;
  if (!t.space.is_l2()) {
    r.lower_bound = true;
    std::mt19937_64 rng(opt.seed);
    double best = 0.0;
    double lo = grid.origin + grid.step, hi = grid.origin + 0.5 * grid.span();
    for (std::size_t k = 0; k < opt.probes; ++k) {
      SampledFunction f = detail::random_probe(grid, lo, hi, rng);
      double nf = t.space.norm(f);
      if (nf == 0.0) continue;
      best = std::max(best, t.space.norm(apply_wh(t, f)) / nf);
    }
    r.value = best;
    r.converged = true;
    return r;
  }
  double L = std::min(opt.initial_window, grid.end());
  double prev = -1.0;
  std::size_t settled = 0;
  while (true) {
    Grid win = detail::window_grid(grid, Interval{grid.origin, L});
    if (t.kind == WienerHopfOperator::Kind::black_box && win.count > opt.max_dense) break;
    double v = detail::section_norm(t, grid, L, opt);
    r.ladder.push_back({L, v});
    r.value = v;
    // dyadic weights grow on alternate doublings, so one quiet step is not enough
    settled = prev > 0.0 && std::abs(v - prev) <= opt.rel_tol * std::max(v, prev) ? settled + 1 : 0;
    if (settled >= std::max<std::size_t>(opt.settle_steps, 1)) {
      r.converged = true;
      return r;
    }
    if (prev == 0.0 && v == 0.0) {
      r.converged = true;
      return r;
    }
    prev = v;
    if (L >= grid.end()) break;
    L = std::min(2.0 * L, grid.end());
  }
  std::ostringstream os;
  os << "operator_norm did not settle within the window ladder:";
  for (auto& s : r.ladder) os << " [L=" << s.window << ": " << s.value << "]";
  throw WindowingError(os.str());
}

// ---------------------------------------------------------------- spectral radius

enum class Direction { forward, backward };

struct SpectralRadiusOptions {
  int n_max = 64;
  SupRange range{};
};

struct SpectralRadiusResult {
  double estimate = 0.0;
  double upper_bound = 0.0;     // inf_n ||S_n||^{1/n}
  double log_estimate = 0.0;
  std::vector<int> n;
  std::vector<double> log_rate;  // log ||S_n|| / n
};

// Gelfand limit of ||S_{+-n}||^{1/n} with Richardson extrapolation in 1/n.
inline SpectralRadiusResult spectral_radius(const Weight& w, double p, Direction dir,
                                            const SpectralRadiusOptions& opt = {}) {
  if (!(p >= 1.0)) throw InvalidInput("p must be >= 1");
  SpectralRadiusResult r;
  double best = INFINITY;
  for (int n = 1; n <= opt.n_max; n *= 2) {
    double s = dir == Direction::forward ? n : -n;
    double l = log_translation_norm(w, s, opt.range) / n;
    r.n.push_back(n);
    r.log_rate.push_back(l);
    best = std::min(best, l);
  }
  double est = r.log_rate.back();
  if (r.log_rate.size() >= 2) {
    std::size_t k = r.log_rate.size();
    est = 2.0 * r.log_rate[k - 1] - r.log_rate[k - 2];
  }
  est = std::min(est, best);
  r.log_estimate = est;
  r.estimate = std::exp(est);
  r.upper_bound = std::exp(best);
  return r;
}

}  // namespace whlab
