#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "linalg.hpp"
#include "norms.hpp"
#include "operators.hpp"
#include "spaces.hpp"
#include "transform.hpp"

namespace whlab {

namespace detail {

// C-infinity transition: 0 for u <= 0, 1 for u >= 1.
inline double smooth_transition(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// Septic smoothstep, C^3 at both ends.
inline double smoothstep7(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double u4 = u * u * u * u;
  return u4 * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
}

}  // namespace detail

// ---------------------------------------------------------------- cut-off functions

struct CutoffRequest {
  double eps = 0.1;
  double eta0 = 5.0;
  double delta = 1.0;
  double c0 = 2.0;
};

struct CutoffOptions {
  double step = 0.0;            // 0 picks a step resolving eta0
  double max_span = 4000.0;     // largest 2 t0 allowed
  double t0_growth = 1.25;
  std::size_t xi_per_width = 40;  // frequency nodes per Gaussian width a
};

struct CutoffResult {
  SampledFunction f;
  double a = 0.0, t0 = 0.0;
  double tail_outside = 0.0;   // int_{R \ V} |f^|
  double total_l1 = 0.0;       // int_R |f^|
  double value_at_t0 = 0.0;    // |f(t0)|
  double g_at_t0 = 0.0;        // |g(t0)| before windowing
  double F_bound = 0.0;        // max (1 + xi^2) |F^| with F = (phi - 1) g
  double tail_limit = 0.0, l1_limit = 0.0, F_limit = 0.0;
  bool pass = false;
  std::vector<double> t0_ladder;
};

namespace detail {

// Transforms are measured in the unitary normalization f^(xi) / sqrt(2 pi).
inline double unitary_scale() { return 1.0 / std::sqrt(2.0 * std::numbers::pi); }

// int |F| over [lo, hi] from node samples, linear between nodes.
inline double integrate_abs_between(const FrequencyFunction& F, double scale, double lo, double hi) {
  double s = 0.0;
  const double d = F.freq_grid.step;
  for (std::size_t k = 0; k + 1 < F.size(); ++k) {
    double x0 = F.xi(k), x1 = x0 + d;
    double a = std::max(lo, x0), b = std::min(hi, x1);
    if (b <= a) continue;
    double v0 = std::abs(F.values[k]) * scale, v1 = std::abs(F.values[k + 1]) * scale;
    double fa = v0 + (v1 - v0) * (a - x0) / d, fb = v0 + (v1 - v0) * (b - x0) / d;
    s += 0.5 * (fa + fb) * (b - a);
  }
  return s;
}

inline double integrate_abs(const FrequencyFunction& F, double scale) {
  double s = 0.0;
  for (auto& v : F.values) s += std::abs(v);
  return s * scale * F.freq_grid.step;
}

inline std::size_t padded_count(double span_needed, double h) {
  return fast_length(static_cast<std::size_t>(std::ceil(span_needed / h)) + 1);
}

}  // namespace detail

// Gaussian width a with sqrt(2 pi) erfc(delta / (a sqrt 2)) <= eps / (2 C0).
inline double cutoff_width(const CutoffRequest& req) {
  const double target = req.eps / (2.0 * req.c0);
  auto tail = [&](double a) { return std::sqrt(2.0 * std::numbers::pi) * std::erfc(req.delta / (a * std::sqrt(2.0))); };
  double lo = 0.0, hi = req.delta;
  while (tail(hi) <= target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    double mid = 0.5 * (lo + hi);
    (tail(mid) <= target ? lo : hi) = mid;
  }
  return lo;
}

// f = phi g with g(t) = exp(-a^2 (t - t0)^2 / 2) exp(i (t - t0) eta0) and phi
// a smooth window equal to 1 on [1, 2 t0 - 1], vanishing off (1/2, 2 t0 - 1/2).
inline CutoffResult build_cutoff(const CutoffRequest& req, const CutoffOptions& opt = {}) {
  if (!(req.eps > 0.0 && req.eps < 1.0)) throw InvalidInput("cutoff needs 0 < eps < 1");
  if (!(req.delta > 0.0) || !(req.c0 > 0.0)) throw InvalidInput("cutoff needs delta > 0 and C0 > 0");
  if (!(req.eta0 - req.delta >= 0.0)) throw InvalidInput("cutoff band V must lie in R+ (eta0 >= delta)");
  CutoffResult r;
  r.a = cutoff_width(req);
  const double a = r.a;
  const double h = opt.step > 0.0 ? opt.step : std::min(0.05, std::numbers::pi / (8.0 * (req.eta0 + 8.0 * a)));
  r.tail_limit = req.eps / req.c0;
  r.l1_limit = 2.0 * std::sqrt(2.0 * std::numbers::pi);
  r.F_limit = req.eps / (2.0 * std::numbers::pi * req.c0);
  const double us = detail::unitary_scale();
  const double reach = std::sqrt(2.0 * 745.0) / a;  // g underflows beyond this distance
  const double xi_span = 2.0 * std::numbers::pi * static_cast<double>(opt.xi_per_width) / a;

  double t0 = std::max(2.5, 1.0 + 3.0 / a);
  for (;;) {
    t0 = std::ceil(t0 / h) * h;
    if (2.0 * t0 > opt.max_span) {
      std::ostringstream os;
      os << "cutoff needs t0 = " << t0 << " (span " << 2.0 * t0 << ") beyond max_span " << opt.max_span;
      throw GridError(os.str());
    }
    r.t0_ladder.push_back(t0);
    auto g = [&](double t) { return std::exp(-0.5 * a * a * (t - t0) * (t - t0)) * std::polar(1.0, (t - t0) * req.eta0); };
    auto phi = [&](double t) {
      return detail::smooth_transition(2.0 * (t - 0.5)) * detail::smooth_transition(2.0 * (2.0 * t0 - 0.5 - t));
    };

    Grid fg = Grid::covering(0.0, h, 2.0 * t0);
    SampledFunction f = SampledFunction::sample(fg, [&](double t) { return phi(t) * g(t); });
    std::size_t nf = std::max(fg.count, detail::padded_count(xi_span, h));
    FrequencyFunction Fh = forward_transform(f.padded_to(nf));

    double R = std::max(reach, t0) + 1.0;
    Grid Fgrid = Grid::aligned(t0 - R, t0 + R, h);
    SampledFunction Fs = SampledFunction::sample(Fgrid, [&](double t) { return (phi(t) - 1.0) * g(t); });
    FrequencyFunction FF = forward_transform(Fs);
    double fb = 0.0;
    for (std::size_t k = 0; k < FF.size(); ++k) fb = std::max(fb, (1.0 + FF.xi(k) * FF.xi(k)) * std::abs(FF.values[k]) * us);

    double total = detail::integrate_abs(Fh, us);
    double inside = detail::integrate_abs_between(Fh, us, req.eta0 - req.delta, req.eta0 + req.delta);
    double tail = std::max(0.0, total - inside);

    if (fb <= r.F_limit && tail <= r.tail_limit) {
      r.t0 = t0;
      r.f = std::move(f);
      r.F_bound = fb;
      r.total_l1 = total;
      r.tail_outside = tail;
      auto k0 = r.f.grid.node_offset(t0);
      r.value_at_t0 = std::abs(r.f.values[static_cast<std::size_t>(*k0)]);
      r.g_at_t0 = std::abs(g(t0));
      r.pass = r.tail_outside <= r.tail_limit && r.total_l1 <= r.l1_limit + 1e-6 && std::abs(r.value_at_t0 - 1.0) <= 1e-9;
      return r;
    }
    t0 *= opt.t0_growth;
  }
}

// ---------------------------------------------------------------- quasi-eigenvectors

// Plateau [lo, hi] with septic ramps of half the plateau length on each side.
inline double plateau_window(double x, Interval plateau) {
  double r = 0.5 * (plateau.hi - plateau.lo);
  if (x < plateau.lo) return detail::smoothstep7((x - (plateau.lo - r)) / r);
  if (x > plateau.hi) return detail::smoothstep7(((plateau.hi + r) - x) / r);
  return 1.0;
}

namespace detail {

// e^{k x} eta(x), normalized in L^p_omega; magnitudes formed in log space.
inline SampledFunction modulated_plateau(const Grid& g, Interval plateau, cplx k, const Weight& w, double p) {
  if (!(plateau.hi > plateau.lo)) throw InvalidInput("empty plateau");
  double r = 0.5 * (plateau.hi - plateau.lo);
  if (plateau.lo - r < g.origin + 1.0 || plateau.hi + r > g.end() - 1.0) {
    std::ostringstream os;
    os << "window [" << plateau.lo - r << ", " << plateau.hi + r << "] must stay 1 away from the grid ends [" << g.origin
       << ", " << g.end() << "]";
    throw InvalidInput(os.str());
  }
  std::vector<double> logmag(g.count, -INFINITY);
  std::vector<double> terms;
  for (std::size_t i = 0; i < g.count; ++i) {
    double x = g.at(i);
    double eta = plateau_window(x, plateau);
    if (eta <= 0.0) continue;
    logmag[i] = k.real() * x + std::log(eta);
    terms.push_back(p * (logmag[i] + w.log_value(x)) + std::log(detail::trapezoid_weight(i, g.count, g.step)));
  }
  double lognorm = detail::log_sum_exp(terms) / p;
  CVec v(g.count, cplx(0.0));
  for (std::size_t i = 0; i < g.count; ++i) {
    if (!std::isfinite(logmag[i])) continue;
    double l = logmag[i] - lognorm;
    if (l > kLogMax) {
      std::ostringstream os;
      os << "quasi-eigenvector overflows at x = " << g.at(i);
      throw OverflowError(os.str());
    }
    v[i] = std::exp(l) * std::polar(1.0, k.imag() * g.at(i));
  }
  return SampledFunction(g, std::move(v));
}

inline cplx complex_log(cplx z) { return cplx(std::log(std::abs(z)), std::arg(z)); }

}  // namespace detail

// forward: f = lambda^{-x} eta, so S f ~ lambda f; backward: f = lambda^{x} eta, so S_{-1} f ~ lambda f.
inline SampledFunction quasi_eigenvector(cplx lambda, Interval plateau, const Weight& w, Direction dir, const Grid& g,
                                         double p = 2.0) {
  if (lambda == cplx(0.0)) throw InvalidInput("quasi-eigenvector needs lambda != 0");
  cplx l = detail::complex_log(lambda);
  return detail::modulated_plateau(g, plateau, dir == Direction::forward ? -l : l, w, p);
}

// ||S_{+-1} f - lambda f|| / ||f|| on L^p_omega.
inline double quasi_residual(const SampledFunction& f, cplx lambda, const Weight& w, Direction dir, double p = 2.0) {
  SampledFunction sf = apply_shift(f, dir == Direction::forward ? 1.0 : -1.0);
  return std::exp(log_lp_norm(sf - lambda * f, p, w) - log_lp_norm(f, p, w));
}

// ---------------------------------------------------------------- finite sections of S - lambda

struct SectionMin {
  double sigma = INFINITY;   // smallest singular value over the window
  SampledFunction witness;   // minimizing function, unit norm in L^2_omega
};

namespace detail {

// Smallest singular value of the rectangular section of S_{+-1} - lambda with
// input window [lo, hi]. On a grid of step 1/m the operator splits into m
// bidiagonal fibers; each A*A is tridiagonal and a diagonal phase makes it real.
inline SectionMin section_min(cplx lambda, Interval window, const Weight& w, Direction dir, const Grid& g) {
  const double m_real = 1.0 / g.step;
  const auto m = static_cast<std::ptrdiff_t>(std::llround(m_real));
  if (m < 1 || std::abs(m_real - static_cast<double>(m)) > 1e-9 * m_real)
    throw AlignmentError("section grid step must be 1/m");
  auto i0 = g.node_offset(window.lo), i1 = g.node_offset(window.hi);
  if (!i0 || !i1 || *i1 <= *i0) throw InvalidInput("section window must be grid aligned");
  const auto ng = static_cast<std::ptrdiff_t>(g.count);
  if (dir == Direction::forward ? (*i1 + m >= ng) : (*i0 - m < 0)) throw InvalidInput("section output leaves the grid");
  const cplx v = -lambda;
  SectionMin best;
  CVec bestu;
  std::vector<std::ptrdiff_t> bestnodes;
  for (std::ptrdiff_t r = 0; r < m; ++r) {
    std::vector<std::ptrdiff_t> nodes;
    for (std::ptrdiff_t i = *i0 + r; i <= *i1; i += m) nodes.push_back(i);
    const auto n = static_cast<Eigen::Index>(nodes.size());
    if (n == 0) continue;
    // coefficient of u_j in the neighbouring output row, in weighted coordinates
    std::vector<double> c(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      double x = g.at(static_cast<std::size_t>(nodes[j]));
      double y = dir == Direction::forward ? x + 1.0 : x - 1.0;
      c[j] = std::exp(w.log_value(y) - w.log_value(x));
    }
    Eigen::VectorXd diag(n), off(std::max<Eigen::Index>(n - 1, 0));
    CVec e(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)));
    for (Eigen::Index j = 0; j < n; ++j) diag(j) = std::norm(v) + c[static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      auto ju = static_cast<std::size_t>(j);
      e[ju] = dir == Direction::forward ? c[ju] * v : std::conj(v) * c[ju + 1];
      off(j) = std::abs(e[ju]);
    }
    linalg::TridiagonalMin tm = linalg::smallest_eigenpair(diag, off);
    double sigma = std::sqrt(std::max(0.0, tm.eigenvalue));
    if (sigma < best.sigma) {
      best.sigma = sigma;
      CVec u(nodes.size());
      cplx phase = 1.0;
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        u[j] = phase * tm.vector(static_cast<Eigen::Index>(j));
        if (j < e.size() && std::abs(e[j]) > 0.0) phase *= std::conj(e[j]) / std::abs(e[j]);
      }
      bestu = std::move(u);
      bestnodes = std::move(nodes);
    }
  }
  CVec f(g.count, cplx(0.0));
  const double sh = std::sqrt(g.step);
  for (std::size_t j = 0; j < bestnodes.size(); ++j) {
    auto i = static_cast<std::size_t>(bestnodes[j]);
    if (bestu[j] == cplx(0.0)) continue;
    double l = std::log(std::abs(bestu[j])) - std::log(sh) - w.log_value(g.at(i));
    if (l > kLogMax) throw OverflowError("section witness overflows");
    f[i] = std::exp(l) * (bestu[j] / std::abs(bestu[j]));
  }
  best.witness = SampledFunction(g, std::move(f));
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------- Neumann bounds

struct NeumannBound {
  int terms = 0;
  double partial = 0.0;   // sum_{n < N} ||S^n|| / |lambda|^{n+1}
  double tail = 0.0;      // C_k (r_k / |lambda|)^N / (|lambda| - r_k)
  double bound = INFINITY;
  int k = 0;
  double r_k = 0.0, c_k = 0.0;
  bool converged = false;
};

struct ShiftPowers {
  Direction dir = Direction::forward;
  std::vector<double> log_norm;  // log ||S^n||, n = 0..N-1 (and N)
};

inline ShiftPowers shift_powers(const Weight& w, Direction dir, int terms, const SupRange& range = {}) {
  ShiftPowers s;
  s.dir = dir;
  s.log_norm.resize(static_cast<std::size_t>(terms) + 1, 0.0);
  for (int n = 1; n <= terms; ++n)
    s.log_norm[static_cast<std::size_t>(n)] = log_translation_norm(w, dir == Direction::forward ? n : -n, range);
  return s;
}

// ||(S - lambda)^{-1}|| <= sum_n ||S^n|| / |lambda|^{n+1}, using ||S^n|| <= C_k r_k^n for the tail.
inline NeumannBound neumann_bound(const ShiftPowers& pw, double mod) {
  NeumannBound best;
  const int N = static_cast<int>(pw.log_norm.size()) - 1;
  const double lm = std::log(mod);
  double partial = 0.0;
  for (int n = 0; n < N; ++n) partial += std::exp(pw.log_norm[static_cast<std::size_t>(n)] - (n + 1) * lm);
  for (int k = 1; k <= N; k *= 2) {
    double lr = pw.log_norm[static_cast<std::size_t>(k)] / k;
    if (!(lr < lm)) continue;
    double lc = 0.0;
    for (int j = 0; j < k; ++j) lc = std::max(lc, pw.log_norm[static_cast<std::size_t>(j)] - j * lr);
    double r = std::exp(lr);
    double tail = std::exp(lc + N * (lr - lm)) / (mod - r);
    if (partial + tail < best.bound) {
      best.terms = N;
      best.partial = partial;
      best.tail = tail;
      best.bound = partial + tail;
      best.k = k;
      best.r_k = r;
      best.c_k = std::exp(lc);
      best.converged = true;
    }
  }
  if (!best.converged) {
    best.terms = N;
    best.partial = partial;
  }
  return best;
}

// ---------------------------------------------------------------- annulus certificates

enum class CertificateKind { inside, outside, out_of_characterization, inconclusive };

inline const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::inside: return "inside";
    case CertificateKind::outside: return "outside";
    case CertificateKind::out_of_characterization: return "out_of_characterization";
    case CertificateKind::inconclusive: return "inconclusive";
  }
  return "?";
}

struct AnnulusOptions {
  double step = 0.25;                                    // 1/m
  std::vector<double> ladder{32.0, 64.0, 128.0, 256.0, 512.0};
  double window_start = 1.0;
  double inside_tol = 5e-2;
  int neumann_terms = 64;
  double boundary_slack = 1e-6;                          // relative slack on the annulus radii
  SpectralRadiusOptions radius{};
};

struct LadderStep {
  double window = 0.0;
  double residual = 0.0;          // section minimum, recomputed from the witness
  double plateau_residual = 0.0;  // smooth plateau quasi-eigenvector on the same window
};

struct SideResult {
  std::string op;  // "S" or "S_-1"
  cplx lambda = 0.0;
  std::vector<LadderStep> ladder;
  double residual = INFINITY;
  SampledFunction witness;
  double trend = 0.0;  // last / first ladder residual
};

struct SpectralCertificate {
  cplx lambda = 0.0;
  CertificateKind kind = CertificateKind::inconclusive;
  double rho_forward = 0.0, rho_backward = 0.0;
  double inner_radius = 0.0, outer_radius = 0.0;
  std::optional<SideResult> primary;    // S at lambda
  std::optional<SideResult> companion;  // S_{-1} at 1/lambda
  bool companion_agrees = true;
  std::optional<NeumannBound> neumann;
  std::string neumann_operator;
  double residual_floor = 0.0;          // 1 / resolvent bound
  std::string note;

  double residual() const { return primary ? primary->residual : INFINITY; }
};

struct AnnulusContext {
  Weight weight;
  double rho_forward = 0.0, rho_backward = 0.0;
  ShiftPowers forward, backward;
};

inline AnnulusContext annulus_context(const Weight& w, const AnnulusOptions& opt = {}) {
  AnnulusContext c{w, 0.0, 0.0, {}, {}};
  c.rho_forward = spectral_radius(w, 2.0, Direction::forward, opt.radius).estimate;
  c.rho_backward = spectral_radius(w, 2.0, Direction::backward, opt.radius).estimate;
  c.forward = shift_powers(w, Direction::forward, opt.neumann_terms, opt.radius.range);
  c.backward = shift_powers(w, Direction::backward, opt.neumann_terms, opt.radius.range);
  return c;
}

// Window ladder of section minima for S_{+-1} - lambda on L^2_omega.
inline SideResult section_ladder(cplx lambda, const Weight& w, Direction dir, const AnnulusOptions& opt = {}) {
  SideResult s;
  s.op = dir == Direction::forward ? "S" : "S_-1";
  s.lambda = lambda;
  double xmax = *std::max_element(opt.ladder.begin(), opt.ladder.end());
  Grid g = Grid::covering(0.0, opt.step, opt.window_start + xmax + 2.0);
  for (double X : opt.ladder) {
    Interval win{opt.window_start, opt.window_start + X};
    SectionMin sm = detail::section_min(lambda, win, w, dir, g);
    LadderStep st;
    st.window = X;
    st.residual = quasi_residual(sm.witness, lambda, w, dir);
    Interval plateau{win.lo + 0.25 * X, win.lo + 0.75 * X};
    try {
      st.plateau_residual = quasi_residual(quasi_eigenvector(lambda, plateau, w, dir, g), lambda, w, dir);
    } catch (const OverflowError&) {
      st.plateau_residual = INFINITY;
    }
    s.ladder.push_back(st);
    if (st.residual < s.residual) {
      s.residual = st.residual;
      s.witness = std::move(sm.witness);
    }
  }
  s.trend = s.ladder.back().residual / s.ladder.front().residual;
  return s;
}

// Inside the annulus [1/rho(S_{-1}), rho(S)]: section descent for S at lambda and
// S_{-1} at 1/lambda. Outside: Neumann bound for S (|lambda| large) or S_{-1}
// at 1/lambda (|lambda| small). Labels refer to spec(S) n spec(S_{-1})^{-1}.
inline SpectralCertificate annulus_certificate(cplx lambda, const AnnulusContext& ctx, const AnnulusOptions& opt = {}) {
  SpectralCertificate c;
  c.lambda = lambda;
  c.rho_forward = ctx.rho_forward;
  c.rho_backward = ctx.rho_backward;
  c.inner_radius = 1.0 / ctx.rho_backward;
  c.outer_radius = ctx.rho_forward;
  if (lambda == cplx(0.0)) {
    c.kind = CertificateKind::out_of_characterization;
    c.note = "lambda = 0: S is injective but not surjective; the annulus result says nothing about 0";
    return c;
  }
  const double r = std::abs(lambda);
  const bool above = r > c.outer_radius * (1.0 + opt.boundary_slack);
  const bool below = r < c.inner_radius * (1.0 - opt.boundary_slack);
  if (above || below) {
    NeumannBound nb = above ? neumann_bound(ctx.forward, r) : neumann_bound(ctx.backward, 1.0 / r);
    c.neumann = nb;
    c.neumann_operator = above ? "S" : "S_-1";
    if (nb.converged) {
      c.kind = CertificateKind::outside;
      c.residual_floor = 1.0 / nb.bound;
      c.note = above ? "lambda not in spec(S): Neumann series for (S - lambda)^{-1}"
                     : "1/lambda not in spec(S_-1): Neumann series for (S_-1 - 1/lambda)^{-1}";
    } else {
      c.note = "Neumann series did not converge with the available powers";
    }
    return c;
  }
  c.primary = section_ladder(lambda, ctx.weight, Direction::forward, opt);
  c.companion = section_ladder(1.0 / lambda, ctx.weight, Direction::backward, opt);
  bool a = c.primary->residual <= opt.inside_tol, b = c.companion->residual <= opt.inside_tol;
  c.companion_agrees = a == b;
  c.kind = a && b ? CertificateKind::inside : CertificateKind::inconclusive;
  if (c.kind == CertificateKind::inconclusive) {
    std::ostringstream os;
    os << "ladder-top residuals " << c.primary->residual << " (S) and " << c.companion->residual
       << " (S_-1) against tolerance " << opt.inside_tol;
    c.note = os.str();
  }
  return c;
}

inline SpectralCertificate annulus_certificate(cplx lambda, const Weight& w, const AnnulusOptions& opt = {}) {
  return annulus_certificate(lambda, annulus_context(w, opt), opt);
}

// Residual recomputed from the stored witness.
inline double certificate_residual(const SideResult& s, const Weight& w) {
  return quasi_residual(s.witness, s.lambda, w, s.op == "S" ? Direction::forward : Direction::backward);
}

// ---------------------------------------------------------------- symbol values in the spectrum

struct InclusionOptions {
  double step = 0.05;
  std::vector<double> plateaus{25.0, 50.0, 100.0, 200.0};
  double start = 0.0;   // left end of the window; 0 places it past the kernel reach
  double p = 2.0;
};

struct InclusionPoint {
  cplx alpha = 0.0;
  cplx mu = 0.0;                  // phi^(alpha)
  std::vector<double> plateau;
  std::vector<double> residual;   // ||T_phi f - mu f|| / ||f|| per plateau
  double final_residual = 0.0;
  double trend = 0.0;
};

struct InclusionReport {
  std::vector<InclusionPoint> points;
  double worst_final = 0.0;
};

inline InclusionReport symbol_spectrum_inclusion(const SampledFunction& phi, const Weight& w,
                                                 const std::vector<cplx>& alphas, const InclusionOptions& opt = {}) {
  if (std::abs(phi.grid.step - opt.step) > 1e-12 * opt.step) throw InvalidInput("kernel step differs from inclusion step");
  InclusionReport rep;
  const double reach = std::max(std::abs(phi.grid.origin), std::abs(phi.grid.end()));
  const double start = opt.start > 0.0 ? opt.start : reach + 2.0;
  auto t = WienerHopfOperator::kernel(phi, SpaceSpec::lp(opt.p, w));
  for (cplx alpha : alphas) {
    InclusionPoint pt;
    pt.alpha = alpha;
    pt.mu = strip_eval(phi, alpha);
    for (double L : opt.plateaus) {
      Interval plateau{start + 0.5 * L, start + 1.5 * L};
      Grid g = Grid::covering(0.0, opt.step, start + 2.0 * L + reach + 2.0);
      SampledFunction f = detail::modulated_plateau(g, plateau, cplx(0.0, 1.0) * alpha, w, opt.p);
      SampledFunction tf = apply_wh(t, f, ConvolutionMethod::direct);
      double res = std::exp(log_lp_norm(tf - pt.mu * f, opt.p, w) - log_lp_norm(f, opt.p, w));
      pt.plateau.push_back(L);
      pt.residual.push_back(res);
    }
    pt.final_residual = pt.residual.back();
    pt.trend = pt.residual.back() / pt.residual.front();
    rep.worst_final = std::max(rep.worst_final, pt.final_residual);
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

}  // namespace whlab
