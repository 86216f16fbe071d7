#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "norms.hpp"
#include "operators.hpp"
#include "recovery.hpp"
#include "spaces.hpp"
#include "transform.hpp"

namespace whlab {

// I_E = [-ln rho(S_{-1}), ln rho(S)] with the levels at which symbols are stored.
struct StripSpec {
  double a_min = 0.0, a_max = 0.0;
  std::vector<double> levels;
  double rho_forward = 0.0;   // rho(S), 0 when not computed
  double rho_backward = 0.0;  // rho(S_{-1})

  bool degenerate() const { return a_max - a_min <= 0.0; }
  bool contains(double a, double tol = 1e-9) const { return a >= a_min - tol && a <= a_max + tol; }

  static StripSpec uniform(double lo, double hi, std::size_t n) {
    if (!(lo <= hi)) throw InvalidInput("strip needs a_min <= a_max");
    StripSpec s;
    s.a_min = lo;
    s.a_max = hi;
    if (hi == lo || n < 2) {
      s.levels = {lo};
      if (hi != lo) s.levels.push_back(hi);
      return s;
    }
    for (std::size_t i = 0; i < n; ++i)
      s.levels.push_back(i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return s;
  }
};

// Widths below this are treated as a single level.
inline constexpr double kDegenerateWidth = 1e-6;

inline StripSpec strip_for_weight(const Weight& w, double p, std::size_t n_levels = 21,
                                  const SpectralRadiusOptions& opt = {}) {
  double rf = spectral_radius(w, p, Direction::forward, opt).estimate;
  double rb = spectral_radius(w, p, Direction::backward, opt).estimate;
  double lo = -std::log(rb), hi = std::log(rf);
  if (hi - lo < -kDegenerateWidth) {
    std::ostringstream os;
    os << "empty strip: -ln rho(S_-1) = " << lo << " > ln rho(S) = " << hi;
    throw StripError(os.str());
  }
  StripSpec s;
  if (hi - lo < kDegenerateWidth) {
    double mid = 0.5 * (lo + hi);
    s = StripSpec::uniform(mid, mid, 1);
  } else {
    s = StripSpec::uniform(lo, hi, n_levels);
  }
  s.rho_forward = rf;
  s.rho_backward = rb;
  return s;
}

// nu_a(xi) = phi^(xi + i a), sampled on the frequency grid of phi padded to `count` nodes.
inline FrequencyFunction symbol_of_kernel(const SampledFunction& phi, double a, std::size_t count = 0,
                                          const StripSpec* strip = nullptr) {
  if (strip && !strip->contains(a)) {
    std::ostringstream os;
    os << "level a = " << a << " outside the strip [" << strip->a_min << ", " << strip->a_max << "]";
    throw StripError(os.str());
  }
  SampledFunction p = count > phi.size() ? phi.padded_to(count) : phi;
  return forward_transform(twist(p, a));
}

inline FrequencyFunction constant_symbol(const Grid& freq_grid, double spatial_origin, cplx value) {
  return FrequencyFunction(freq_grid, spatial_origin, CVec(freq_grid.count, value));
}

// ---------------------------------------------------------------- representation

struct RepresentationReport {
  std::vector<double> residuals;
  double max_residual = 0.0;
  double tol = 1e-5;
  bool pass = true;
};

namespace detail {

inline void check_probe(const SampledFunction& f, double h) {
  if (std::abs(f.grid.step - h) > 1e-9 * h) throw InvalidInput("probe grid step differs from the symbol's spatial step");
  if (f.grid.origin < -1e-12) throw ProbeError("probe grid starts below 0");
  if (f.size() < 3 || f.is_zero()) throw ProbeError("probe is empty");
  if (f.values.front() != cplx(0.0) || f.values.back() != cplx(0.0)) {
    std::ostringstream os;
    os << "probe support touches the grid ends [" << f.grid.origin << ", " << f.grid.end() << "]";
    throw ProbeError(os.str());
  }
}

}  // namespace detail

// r(f) = ||(Tf)_a - P+ F^{-1}(nu_a (f)_a^)||_2 / ||(Tf)_a||_2 for each probe.
// The symbol's node count sets the periodic window and must cover probe plus kernel.
inline RepresentationReport verify_representation(const WienerHopfOperator& t, const FrequencyFunction& nu, double a,
                                                  const std::vector<SampledFunction>& probes, double tol = 1e-5) {
  RepresentationReport rep;
  rep.tol = tol;
  const double h = nu.spatial_step();
  const std::size_t n = nu.size();
  for (const auto& f : probes) {
    detail::check_probe(f, h);
    if (n < f.size()) throw GridError("symbol grid shorter than the probe grid");
    SampledFunction lhs = twist(apply_wh(t, f, ConvolutionMethod::direct), a);
    FrequencyFunction F = forward_transform(twist(f.padded_to(n), a));
    for (std::size_t k = 0; k < n; ++k) F.values[k] *= nu.values[k];
    SampledFunction full = inverse_transform(F);
    SampledFunction rhs(f.grid, CVec(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(f.size())));
    double num = lp_norm(lhs - rhs, 2.0);
    double den = lp_norm(lhs, 2.0);
    double r = den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0);
    rep.residuals.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  rep.pass = rep.max_residual <= tol;
  return rep;
}

// ---------------------------------------------------------------- black-box extraction

struct ExtractOptions {
  RecoverOptions recover;
  int n = 100;
  double x0 = 5.0;
  double cutoff = 0.1;     // keep nodes with |theta_n^(xi + ia)| >= cutoff
  std::size_t count = 0;   // padding of the recovered kernel, 0 = none
};

struct ExtractedSymbol {
  FrequencyFunction symbol;   // zero outside the validity mask
  std::vector<char> valid;
  double xi_lo = 0.0, xi_hi = 0.0;  // contiguous valid band around xi = 0
  std::size_t valid_count = 0;
  double cutoff = 0.1;
  RecoveredKernel recovered;
};

inline ExtractedSymbol extract_symbol(const WienerHopfOperator& t, double a, const ExtractOptions& opt) {
  ExtractedSymbol out;
  out.cutoff = opt.cutoff;
  out.recovered = recover_kernel(t, opt.n, opt.x0, opt.recover);
  out.symbol = symbol_of_kernel(out.recovered.kernel, a, opt.count);
  const SampledFunction& theta = out.recovered.mollifier;
  if (std::abs(theta.grid.step - out.recovered.kernel.grid.step) > 1e-12)
    throw InvalidInput("extract_symbol needs stride 1 recovery");
  const std::size_t n = out.symbol.size();
  out.valid.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    cplx m = strip_eval(theta, cplx(out.symbol.xi(k), a));
    if (std::abs(m) >= opt.cutoff) {
      out.symbol.values[k] /= m;
      out.valid[k] = 1;
      ++out.valid_count;
    } else {
      out.symbol.values[k] = 0.0;
    }
  }
  if (out.valid_count == 0) {
    std::ostringstream os;
    os << "mollifier transform below " << opt.cutoff << " on every node; increase n";
    throw ScaleError(os.str());
  }
  std::size_t k0 = out.symbol.freq_grid.nearest(0.0);
  std::size_t lo = k0, hi = k0;
  if (out.valid[k0]) {
    while (lo > 0 && out.valid[lo - 1]) --lo;
    while (hi + 1 < n && out.valid[hi + 1]) ++hi;
    out.xi_lo = out.symbol.xi(lo);
    out.xi_hi = out.symbol.xi(hi);
  }
  return out;
}

// ---------------------------------------------------------------- strip bound

struct StripBoundOptions {
  std::size_t levels = 21;
  std::size_t xi_count = 81;
  double xi_max = 20.0;
  double rel_tol = 1e-3;
};

struct StripBoundReport {
  double max_value = 0.0;
  cplx argmax = 0.0;
  double t_norm = 0.0;
  double ratio = 0.0;      // max_value / t_norm
  bool pass = true;
  std::vector<double> a, xi, value;  // lattice in row order
};

// max over an alpha lattice in U_E of |phi^(alpha)| against ||T_phi||.
inline StripBoundReport verify_strip_bound(const SampledFunction& phi, const StripSpec& strip, double t_norm,
                                           const StripBoundOptions& opt = {}) {
  StripBoundReport r;
  r.t_norm = t_norm;
  std::vector<double> levels = StripSpec::uniform(strip.a_min, strip.a_max, strip.degenerate() ? 1 : opt.levels).levels;
  for (double a : levels) {
    for (std::size_t k = 0; k < opt.xi_count; ++k) {
      double xi = opt.xi_count == 1 ? 0.0
                                    : -opt.xi_max + 2.0 * opt.xi_max * static_cast<double>(k) / static_cast<double>(opt.xi_count - 1);
      double v = std::abs(strip_eval(phi, cplx(xi, a)));
      r.a.push_back(a);
      r.xi.push_back(xi);
      r.value.push_back(v);
      if (v > r.max_value) {
        r.max_value = v;
        r.argmax = cplx(xi, a);
      }
    }
  }
  r.ratio = t_norm > 0.0 ? r.max_value / t_norm : (r.max_value > 0.0 ? INFINITY : 0.0);
  r.pass = r.max_value <= t_norm * (1.0 + opt.rel_tol);
  return r;
}

// ---------------------------------------------------------------- symbol tables

struct SymbolTable {
  StripSpec strip;
  std::vector<FrequencyFunction> nu;  // one per strip level
  std::string operator_id;
  Grid grid;                          // spatial grid of the kernel
  std::optional<SampledFunction> kernel;
  double op_norm = 0.0;               // 0 when unknown
  std::vector<double> ratio;          // ||nu_a||_inf / ||T|| per level
};

inline SymbolTable build_symbol_table(const SampledFunction& phi, const StripSpec& strip, std::size_t count,
                                      std::string operator_id, double op_norm = 0.0) {
  SymbolTable t;
  t.strip = strip;
  t.operator_id = std::move(operator_id);
  t.grid = phi.grid;
  t.kernel = phi;
  t.op_norm = op_norm;
  for (double a : strip.levels) {
    t.nu.push_back(symbol_of_kernel(phi, a, count, &strip));
    if (op_norm > 0.0) t.ratio.push_back(t.nu.back().max_abs() / op_norm);
  }
  return t;
}

struct AnalyticityOptions {
  double consistency_tol = 1e-6;
  double cr_tol = 1e-4;
  double xi_check = 20.0;  // cross-level recomputation on |xi| <= xi_check
};

struct AnalyticityReport {
  bool skipped = false;
  std::string notice;
  double consistency = 0.0;   // max |stored - strip_eval| / max |nu_a|
  double cr_residual = 0.0;   // max |d_a nu - i d_xi nu| / max |nu|
  bool consistency_checked = false;
  bool consistency_pass = true;
  bool cr_pass = true;
  bool pass = true;
  double sup_nu = 0.0;
  double norm_ratio = 0.0;    // sup_nu / ||T|| when the norm is known
  int a_stencil = 0;          // points in the level-direction stencil
};

namespace detail {

// Central first-derivative weights for 3, 5 and 7 points.
inline const std::vector<double>& central_weights(int points) {
  static const std::vector<double> w3{-0.5, 0.0, 0.5};
  static const std::vector<double> w5{1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
  static const std::vector<double> w7{-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
  return points >= 7 ? w7 : points >= 5 ? w5 : w3;
}

}  // namespace detail

// Cross-level consistency against strip_eval plus a discrete Cauchy-Riemann
// check d nu / da = i d nu / d xi on the stacked levels.
inline AnalyticityReport verify_analyticity(const SymbolTable& table, const AnalyticityOptions& opt = {}) {
  AnalyticityReport r;
  const std::size_t L = table.nu.size();
  for (const auto& nu : table.nu) r.sup_nu = std::max(r.sup_nu, nu.max_abs());
  if (table.op_norm > 0.0) r.norm_ratio = r.sup_nu / table.op_norm;
  if (table.strip.degenerate() || L < 3) {
    r.skipped = true;
    r.notice = table.strip.degenerate() ? "degenerate strip: no interior, analyticity check skipped"
                                        : "fewer than 3 levels: analyticity check skipped";
    return r;
  }
  const Grid& fg = table.nu.front().freq_grid;
  for (const auto& nu : table.nu)
    if (!(nu.freq_grid == fg)) throw InvalidInput("symbol levels use different frequency grids");
  const auto& lv = table.strip.levels;
  const double da = lv[1] - lv[0];
  for (std::size_t i = 1; i + 1 < L; ++i)
    if (std::abs((lv[i + 1] - lv[i]) - da) > 1e-9 * std::max(1.0, std::abs(da)))
      throw InvalidInput("analyticity check needs uniformly spaced levels");

  if (table.kernel) {
    r.consistency_checked = true;
    for (std::size_t l = 0; l < L; ++l) {
      double scale = table.nu[l].max_abs();
      if (scale == 0.0) continue;
      for (std::size_t k = 0; k < fg.count; ++k) {
        double xi = fg.at(k);
        if (std::abs(xi) > opt.xi_check) continue;
        cplx ref = strip_eval(*table.kernel, cplx(xi, lv[l]));
        r.consistency = std::max(r.consistency, std::abs(table.nu[l].values[k] - ref) / scale);
      }
    }
    r.consistency_pass = r.consistency <= opt.consistency_tol;
  } else {
    r.notice = "no kernel stored: cross-level consistency not checked";
  }

  int pa = L >= 7 ? 7 : L >= 5 ? 5 : 3;
  r.a_stencil = pa;
  const auto& wa = detail::central_weights(pa);
  const auto& wx = detail::central_weights(7);
  const std::size_t ha = static_cast<std::size_t>(pa / 2), hx = 3;
  const double dxi = fg.step;
  double worst = 0.0;
  for (std::size_t l = ha; l + ha < L; ++l) {
    for (std::size_t k = hx; k + hx < fg.count; ++k) {
      cplx d_a = 0.0, d_xi = 0.0;
      for (std::size_t s = 0; s < wa.size(); ++s) d_a += wa[s] * table.nu[l + s - ha].values[k];
      for (std::size_t s = 0; s < wx.size(); ++s) d_xi += wx[s] * table.nu[l].values[k + s - hx];
      d_a /= da;
      d_xi /= dxi;
      worst = std::max(worst, std::abs(d_a - cplx(0.0, 1.0) * d_xi));
    }
  }
  r.cr_residual = r.sup_nu > 0.0 ? worst / r.sup_nu : worst;
  r.cr_pass = r.cr_residual <= opt.cr_tol;
  r.pass = r.consistency_pass && r.cr_pass;
  return r;
}

}  // namespace whlab
