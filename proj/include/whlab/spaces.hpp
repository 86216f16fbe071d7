#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grid.hpp"
#include "transform.hpp"
#include "weights.hpp"

namespace whlab {

// ---------------------------------------------------------------- sampled sups

struct SupRange {
  double max_x = 1024.0;
  double coarse_step = 1.0 / 64.0;
  double min_x = 0.0;
};

namespace detail {

inline double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters = 80) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  double best = std::max(fc, fd);
  for (int i = 0; i < iters && b - a > 1e-13 * std::max(1.0, std::abs(a)); ++i) {
    if (fc >= fd) {
      b = d; d = c; fd = fc;
      c = b - r * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + r * (b - a); fd = f(d);
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

}  // namespace detail

// log sup_x omega(x+n)/omega(x) over [min_x, max_x] by coarse scan plus
// golden-section refinement around the best coarse node.
inline double sampled_log_ratio_sup(const Weight& w, double n, const SupRange& r = {}) {
  const double m = std::abs(n);
  auto g = [&](double x) { return n >= 0.0 ? w.log_value(x + m) - w.log_value(x) : w.log_value(x) - w.log_value(x + m); };
  auto steps = static_cast<std::size_t>(std::ceil((r.max_x - r.min_x) / r.coarse_step));
  double best = -std::numeric_limits<double>::infinity();
  double arg = r.min_x;
  for (std::size_t i = 0; i <= steps; ++i) {
    double x = std::min(r.min_x + r.coarse_step * static_cast<double>(i), r.max_x);
    double v = g(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "weight ratio not finite at x = " << x << " for offset " << n;
      throw WeightError(os.str());
    }
    if (v > best) { best = v; arg = x; }
  }
  double lo = std::max(r.min_x, arg - r.coarse_step), hi = std::min(r.max_x, arg + r.coarse_step);
  if (hi > lo) best = std::max(best, detail::golden_max(g, lo, hi));
  return best;
}

// log ||S_n|| on L^p_omega, which is log ess sup omega(x+n)/omega(x) for every p.
inline double log_translation_norm(const Weight& w, double n, const SupRange& r = {}) {
  if (auto e = w.exact_log_ratio(n)) return *e;
  return sampled_log_ratio_sup(w, n, r);
}

inline double translation_norm(const Weight& w, double p, double n, const SupRange& r = {}) {
  if (!(p >= 1.0)) throw InvalidInput("p must be >= 1");
  double l = log_translation_norm(w, n, r);
  if (l > kLogMax) throw OverflowError("translation norm exceeds double range");
  return std::exp(l);
}

// ---------------------------------------------------------------- admissibility

struct AdmissibilityRow {
  double offset = 0.0;
  double log_up = 0.0;        // log sup omega(x+y)/omega(x)
  double log_down = 0.0;      // log sup omega(x)/omega(x+y)
  double log_up_half = 0.0;   // same sups over the first half of the range
  double log_down_half = 0.0;
};

struct AdmissibilityOptions {
  double log_ceiling = 50.0;  // ratios above e^50 count as unbounded
  double growth_tol = 1.0;    // allowed log-growth between half and full range
};

struct AdmissibilityReport {
  std::vector<AdmissibilityRow> rows;
  bool pass = true;
  std::string diagnostic;
};

inline AdmissibilityReport check_admissibility(const Weight& w, const std::vector<double>& offsets, const Grid& grid,
                                               const AdmissibilityOptions& opt = {}) {
  AdmissibilityReport rep;
  for (std::size_t i = 0; i < grid.count; ++i) {
    double lv = w.log_value(grid.at(i));
    if (!std::isfinite(lv)) {
      std::ostringstream os;
      os << "weight is not positive and finite at x = " << grid.at(i);
      throw WeightError(os.str());
    }
  }
  std::ostringstream diag;
  for (double y : offsets) {
    if (!(y > 0.0)) throw InvalidInput("probe offsets must be positive");
    double top = grid.end() - y;
    if (top <= grid.origin) throw InvalidInput("probe offset exceeds the grid span");
    SupRange full{top, grid.step, grid.origin};
    SupRange half{grid.origin + 0.5 * (top - grid.origin), grid.step, grid.origin};
    AdmissibilityRow row{y, sampled_log_ratio_sup(w, y, full), sampled_log_ratio_sup(w, -y, full),
                         sampled_log_ratio_sup(w, y, half), sampled_log_ratio_sup(w, -y, half)};
    auto flag = [&](double full_v, double half_v, const char* dir) {
      if (full_v > opt.log_ceiling) {
        rep.pass = false;
        diag << dir << "-ratio for offset " << y << " is e^" << full_v << ", above the ceiling e^" << opt.log_ceiling
             << "; ";
      } else if (full_v - half_v > opt.growth_tol) {
        rep.pass = false;
        diag << dir << "-ratio for offset " << y << " keeps growing across the range (e^" << half_v << " -> e^"
             << full_v << "); ";
      }
    };
    flag(row.log_up, row.log_up_half, "up");
    flag(row.log_down, row.log_down_half, "down");
    rep.rows.push_back(row);
  }
  rep.diagnostic = diag.str();
  return rep;
}

// ---------------------------------------------------------------- norms

namespace detail {

inline double trapezoid_weight(std::size_t i, std::size_t n, double h) { return (i == 0 || i + 1 == n) ? 0.5 * h : h; }

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace detail

// log of (int |f|^p omega^p dx)^{1/p}; -inf for the zero function.
inline double log_lp_norm(const SampledFunction& f, double p, const Weight& w) {
  if (!(p >= 1.0)) throw InvalidInput("p must be >= 1");
  std::vector<double> terms;
  terms.reserve(f.size());
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) {
    double a = std::abs(f.values[i]);
    if (a == 0.0) continue;
    terms.push_back(p * (std::log(a) + w.log_value(f.x(i))) + std::log(detail::trapezoid_weight(i, n, f.grid.step)));
  }
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  return detail::log_sum_exp(terms) / p;
}

inline double lp_norm(const SampledFunction& f, double p, const Weight& w) {
  double l = log_lp_norm(f, p, w);
  if (l > kLogMax) throw OverflowError("lp_norm exceeds double range");
  return std::exp(l);
}

inline double lp_norm(const SampledFunction& f, double p) { return lp_norm(f, p, Weight::constant()); }

// ---------------------------------------------------------------- Orlicz

struct OrliczFunction {
  std::string name;
  double p = 0.0;  // exponent for the power family, 0 otherwise
  std::function<double(double)> A;

  static OrliczFunction power(double p) {
    if (!(p >= 1.0)) throw InvalidInput("orlicz:power needs p >= 1");
    return {"orlicz:power", p, [p](double y) { return std::pow(y, p); }};
  }
  static OrliczFunction exp() {
    return {"orlicz:exp", 0.0, [](double y) { return std::expm1(y); }};
  }
  static OrliczFunction ylog() {
    return {"orlicz:ylog", 0.0, [](double y) { return y * std::log1p(y); }};
  }

  double operator()(double y) const { return A(y); }
};

struct OrliczCheck {
  bool pass = true;
  std::string diagnostic;
};

// A(0) = 0, A finite and A(y)/y non-decreasing on a log-spaced probe set.
inline OrliczCheck check_orlicz(const OrliczFunction& A) {
  OrliczCheck c;
  if (A(0.0) != 0.0) {
    c.pass = false;
    c.diagnostic = "A(0) != 0";
    return c;
  }
  double prev = -1.0;
  for (int k = -60; k <= 60; ++k) {
    double y = std::pow(10.0, k / 10.0);
    double v = A(y);
    if (std::isinf(v)) break;
    if (!std::isfinite(v) || v < 0.0) {
      c.pass = false;
      c.diagnostic = "A is not finite and non-negative at y = " + std::to_string(y);
      return c;
    }
    double q = v / y;
    if (q < prev * (1.0 - 1e-12)) {
      c.pass = false;
      c.diagnostic = "A(y)/y decreases near y = " + std::to_string(y);
      return c;
    }
    prev = q;
  }
  return c;
}

struct LuxemburgOptions {
  double tol = 1e-10;          // target |I(t*) - 1|
  double range_factor = 1e12;  // bracket search within [t0/range, t0*range]
};

struct LuxemburgResult {
  double value = 0.0;
  double modular = 0.0;  // int A(|f|/t*) (omega) dx
  double lo = 0.0, hi = 0.0;
};

inline LuxemburgResult luxemburg_detail(const SampledFunction& f, const OrliczFunction& A, const Weight* w,
                                        const LuxemburgOptions& opt = {}) {
  LuxemburgResult r;
  const double t0 = f.max_abs();
  if (t0 == 0.0) return r;
  const std::size_t n = f.size();
  std::vector<double> logq(n);
  for (std::size_t i = 0; i < n; ++i)
    logq[i] = std::log(detail::trapezoid_weight(i, n, f.grid.step)) + (w ? w->log_value(f.x(i)) : 0.0);
  auto modular = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double a = std::abs(f.values[i]);
      if (a == 0.0) continue;
      double v = A(a / t);
      if (std::isinf(v)) return std::numeric_limits<double>::infinity();
      if (v > 0.0) s += std::exp(std::log(v) + logq[i]);
    }
    return s;
  };
  double lo = t0, hi = t0;
  while (!(modular(hi) <= 1.0)) {
    hi *= 2.0;
    if (hi > t0 * opt.range_factor) {
      std::ostringstream os;
      os << "luxemburg_norm: modular stays above 1 on [" << t0 << ", " << t0 * opt.range_factor << "]";
      throw BracketError(os.str());
    }
  }
  while (modular(lo) <= 1.0) {
    lo *= 0.5;
    if (lo < t0 / opt.range_factor) {
      std::ostringstream os;
      os << "luxemburg_norm: modular stays below 1 on [" << t0 / opt.range_factor << ", " << t0 << "]";
      throw BracketError(os.str());
    }
  }
  for (int it = 0; it < 400 && hi / lo - 1.0 > 4e-16; ++it) {
    double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (modular(mid) <= 1.0) hi = mid;
    else lo = mid;
  }
  r.value = hi;
  r.modular = modular(hi);
  r.lo = lo;
  r.hi = hi;
  return r;
}

inline double luxemburg_norm(const SampledFunction& f, const OrliczFunction& A, const std::optional<Weight>& w = {},
                             const LuxemburgOptions& opt = {}) {
  return luxemburg_detail(f, A, w ? &*w : nullptr, opt).value;
}

// ---------------------------------------------------------------- spaces

struct SpaceSpec {
  enum class Kind { lp_weighted, orlicz, weighted_orlicz };

  Kind kind = Kind::lp_weighted;
  double p = 2.0;
  Weight weight = Weight::constant();
  std::optional<OrliczFunction> A;

  static SpaceSpec lp(double p, Weight w = Weight::constant()) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("p must lie in [1, inf)");
    SpaceSpec s;
    s.kind = Kind::lp_weighted;
    s.p = p;
    s.weight = std::move(w);
    return s;
  }
  static SpaceSpec orlicz(OrliczFunction A) {
    SpaceSpec s;
    s.kind = Kind::orlicz;
    s.A = std::move(A);
    return s;
  }
  static SpaceSpec weighted_orlicz(OrliczFunction A, Weight w) {
    SpaceSpec s;
    s.kind = Kind::weighted_orlicz;
    s.A = std::move(A);
    s.weight = std::move(w);
    return s;
  }

  bool is_l2() const { return kind == Kind::lp_weighted && p == 2.0; }

  double norm(const SampledFunction& f) const {
    switch (kind) {
      case Kind::lp_weighted: return lp_norm(f, p, weight);
      case Kind::orlicz: return luxemburg_norm(f, *A);
      case Kind::weighted_orlicz: return luxemburg_norm(f, *A, weight);
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::lp_weighted: return "L^" + std::to_string(p) + " weighted by " + weight.describe();
      case Kind::orlicz: return "Orlicz " + A->name;
      case Kind::weighted_orlicz: return "weighted Orlicz " + A->name + " with " + weight.describe();
    }
    return "";
  }
};

}  // namespace whlab
