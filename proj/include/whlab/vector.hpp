#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "norms.hpp"
#include "operators.hpp"
#include "recovery.hpp"
#include "spaces.hpp"
#include "spectra.hpp"
#include "symbol.hpp"
#include "transform.hpp"

namespace whlab {

// Inner product on C^d, linear in u and conjugate-linear in v.
inline cplx inner(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) { return v.dot(u); }

inline Eigen::VectorXcd basis_vector(std::size_t d, std::size_t i) {
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d));
  e(static_cast<Eigen::Index>(i)) = 1.0;
  return e;
}

// ---------------------------------------------------------------- vector functions

// Samples of F: R+ -> C^d, one column per grid node.
struct VectorFunction {
  Grid grid;
  Eigen::MatrixXcd values;  // d x N

  VectorFunction() = default;
  VectorFunction(Grid g, Eigen::MatrixXcd v) : grid(g), values(std::move(v)) {
    if (values.rows() < 1) throw InvalidInput("vector function needs d >= 1");
    if (static_cast<std::size_t>(values.cols()) != grid.count) throw InvalidInput("sample count does not match grid");
    if (!values.allFinite()) throw InvalidInput("vector function: non-finite sample");
  }
  VectorFunction(Grid g, std::size_t d) : grid(g), values(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(g.count))) {
    if (d < 1) throw InvalidInput("vector function needs d >= 1");
  }

  std::size_t dim() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t size() const { return grid.count; }

  // f(x) u
  static VectorFunction tensor(const SampledFunction& f, const Eigen::VectorXcd& u) {
    Eigen::Map<const Eigen::RowVectorXcd> row(f.values.data(), static_cast<Eigen::Index>(f.size()));
    return VectorFunction(f.grid, u * row);
  }

  static VectorFunction from_components(const std::vector<SampledFunction>& c) {
    if (c.empty()) throw InvalidInput("vector function needs d >= 1");
    VectorFunction F(c.front().grid, c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (!(c[j].grid == F.grid)) throw InvalidInput("components live on different grids");
      for (std::size_t i = 0; i < F.size(); ++i) F.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c[j].values[i];
    }
    return F;
  }

  SampledFunction component(std::size_t j) const {
    CVec v(size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    return SampledFunction(grid, std::move(v));
  }

  // x -> ||F(x)||_H
  SampledFunction norm_profile() const {
    CVec v(size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = values.col(static_cast<Eigen::Index>(i)).norm();
    return SampledFunction(grid, std::move(v));
  }

  // x -> <F(x), v>
  SampledFunction pair_with(const Eigen::VectorXcd& v) const {
    if (static_cast<std::size_t>(v.size()) != dim()) throw InvalidInput("pairing vector has the wrong dimension");
    CVec out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = inner(values.col(static_cast<Eigen::Index>(i)), v);
    return SampledFunction(grid, std::move(out));
  }
};

inline VectorFunction operator-(const VectorFunction& a, const VectorFunction& b) {
  if (!(a.grid == b.grid) || a.dim() != b.dim()) throw InvalidInput("vector functions differ in grid or dimension");
  return VectorFunction(a.grid, a.values - b.values);
}

inline double log_vector_lp_norm(const VectorFunction& F, double p, const Weight& w) {
  return log_lp_norm(F.norm_profile(), p, w);
}

// (int ||F(x)||^p omega(x)^p dx)^{1/p}
inline double vector_lp_norm(const VectorFunction& F, double p, const Weight& w = Weight::constant()) {
  double l = log_vector_lp_norm(F, p, w);
  if (l > kLogMax) throw OverflowError("vector norm exceeds double range");
  return std::exp(l);
}

inline VectorFunction apply_vector_shift(const VectorFunction& F, double a) {
  std::vector<SampledFunction> c;
  for (std::size_t j = 0; j < F.dim(); ++j) c.push_back(apply_shift(F.component(j), a));
  return VectorFunction::from_components(c);
}

inline VectorFunction twist(const VectorFunction& F, double a) {
  std::vector<SampledFunction> c;
  for (std::size_t j = 0; j < F.dim(); ++j) c.push_back(twist(F.component(j), a));
  return VectorFunction::from_components(c);
}

// ---------------------------------------------------------------- rank-r tensor sums

struct TensorSum {
  Grid grid;
  std::size_t dim = 0;
  std::vector<SampledFunction> f;
  std::vector<Eigen::VectorXcd> u;

  VectorFunction evaluate() const {
    VectorFunction F(grid, dim);
    for (std::size_t r = 0; r < f.size(); ++r) F.values += VectorFunction::tensor(f[r], u[r]).values;
    return F;
  }
};

// Best rank-r sum of elementary tensors f_i u_i for the d x N sample matrix.
inline TensorSum rank_truncation(const VectorFunction& F, std::size_t r) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(F.values, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TensorSum t;
  t.grid = F.grid;
  t.dim = F.dim();
  const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(r), svd.singularValues().size());
  for (Eigen::Index i = 0; i < k; ++i) {
    t.u.push_back(svd.matrixU().col(i));
    CVec v(F.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = svd.singularValues()(i) * std::conj(svd.matrixV()(static_cast<Eigen::Index>(j), i));
    t.f.push_back(SampledFunction(F.grid, std::move(v)));
  }
  return t;
}

// ---------------------------------------------------------------- operator weights

// One term c x^k e^{beta x} of a matrix entry.
struct WeightTerm {
  double c = 1.0;
  int k = 0;
  double beta = 0.0;
};

// x -> W(x) in L(C^d). Entry-sum weights are evaluated with the largest
// exponential rate factored out so that only log ||W|| ever grows.
class OperatorWeight {
 public:
  using MatrixFn = std::function<Eigen::MatrixXcd(double)>;

  static OperatorWeight from_terms(std::size_t d, std::vector<std::vector<WeightTerm>> entries, std::string name = "terms") {
    if (d < 1 || entries.size() != d * d) throw InvalidInput("operator weight needs d*d entries");
    OperatorWeight w;
    w.d_ = d;
    w.name_ = std::move(name);
    w.terms_ = std::move(entries);
    w.beta_max_ = -std::numeric_limits<double>::infinity();
    for (auto& e : w.terms_)
      for (auto& t : e) {
        if (t.k < 0) throw InvalidInput("weight term power must be >= 0");
        if (t.c != 0.0) w.beta_max_ = std::max(w.beta_max_, t.beta);
      }
    if (!std::isfinite(w.beta_max_)) throw WeightError("operator weight has no non-zero term");
    return w;
  }

  // omega(x) Identity
  static OperatorWeight scalar(Weight omega, std::size_t d) {
    if (d < 1) throw InvalidInput("operator weight needs d >= 1");
    OperatorWeight w;
    w.d_ = d;
    w.name_ = omega.describe() + " * I";
    w.scalar_ = std::move(omega);
    return w;
  }

  static OperatorWeight custom(std::size_t d, MatrixFn fn, std::string name) {
    OperatorWeight w;
    w.d_ = d;
    w.name_ = std::move(name);
    w.custom_ = std::move(fn);
    return w;
  }

  // The 5x5 weight with entries 1, e^x, e^{3x}, 1+x, x, e^{2x}, x^2/2.
  static OperatorWeight mixed_growth_5x5() {
    const WeightTerm one{1, 0, 0}, x{1, 1, 0}, ex{1, 0, 1}, e2x{1, 0, 2}, e3x{1, 0, 3}, half_x2{0.5, 2, 0};
    using E = std::vector<WeightTerm>;
    const E onepx{one, x};
    std::vector<E> m{
        {one}, {ex}, {e3x}, {one}, {one},
        onepx, {x}, {ex}, {one}, {e3x},
        {ex}, {one}, {one}, {x}, onepx,
        {one}, {one}, {ex}, {e2x}, {one},
        {x}, {x}, onepx, {ex}, {half_x2},
    };
    return from_terms(5, std::move(m), "mixed_growth_5x5");
  }

  std::size_t dim() const { return d_; }
  const std::string& name() const { return name_; }
  bool is_scalar() const { return scalar_.has_value(); }

  // W(x) e^{-s}, with s returned in log_scale.
  Eigen::MatrixXcd scaled(double x, double& log_scale) const {
    const auto n = static_cast<Eigen::Index>(d_);
    if (scalar_) {
      log_scale = scalar_->log_value(x);
      return Eigen::MatrixXcd::Identity(n, n);
    }
    if (custom_) {
      log_scale = 0.0;
      Eigen::MatrixXcd m = (*custom_)(x);
      if (m.rows() != n || m.cols() != n) throw InvalidInput("operator weight " + name_ + " returned a matrix of the wrong size");
      if (!m.allFinite()) throw WeightError("operator weight " + name_ + " is not finite at x = " + std::to_string(x));
      return m;
    }
    log_scale = beta_max_ * x;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (auto& t : terms_[static_cast<std::size_t>(i * n + j)]) s += t.c * std::pow(x, t.k) * std::exp((t.beta - beta_max_) * x);
        m(i, j) = s;
      }
    return m;
  }

  Eigen::MatrixXcd value(double x) const {
    double s = 0.0;
    Eigen::MatrixXcd m = scaled(x, s);
    if (s > kLogMax) throw OverflowError("operator weight value overflows at x = " + std::to_string(x));
    return std::exp(s) * m;
  }

  // log ||W(x)||, operator norm by the largest singular value.
  double log_norm(double x) const {
    double s = 0.0;
    Eigen::MatrixXcd m = scaled(x, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    double top = es.eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw WeightError("operator weight " + name_ + " vanishes at x = " + std::to_string(x));
    return s + 0.5 * std::log(top);
  }

  // log ||W(x) v||
  double log_apply_norm(double x, const Eigen::VectorXcd& v) const {
    double s = 0.0;
    Eigen::MatrixXcd m = scaled(x, s);
    double n = (m * v).norm();
    return n > 0.0 ? s + std::log(n) : -std::numeric_limits<double>::infinity();
  }

  // x -> ||W(x)|| as a scalar weight.
  Weight norm_weight() const {
    OperatorWeight self = *this;
    return Weight::custom("||" + name_ + "||", [self](double x) { return self.log_norm(x); });
  }

  // Diagonal entry weights when W is diagonal with positive entries, else empty.
  std::optional<std::vector<Weight>> diagonal_weights() const {
    if (scalar_) return std::vector<Weight>(d_, *scalar_);
    if (custom_) return std::nullopt;
    std::vector<Weight> out;
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j) {
        const auto& e = terms_[i * d_ + j];
        bool zero = std::all_of(e.begin(), e.end(), [](const WeightTerm& t) { return t.c == 0.0; });
        if (i != j && !zero) return std::nullopt;
        if (i == j) {
          if (zero) return std::nullopt;
          auto terms = e;
          std::ostringstream nm;
          nm << name_ << "[" << i << "," << i << "]";
          out.push_back(Weight::custom(nm.str(), [terms](double x) {
            double m = -std::numeric_limits<double>::infinity();
            for (auto& t : terms) m = std::max(m, t.beta * x);
            double s = 0.0;
            for (auto& t : terms) s += t.c * std::pow(x, t.k) * std::exp(t.beta * x - m);
            return s > 0.0 ? m + std::log(s) : (s == 0.0 ? -INFINITY : NAN);
          }));
        }
      }
    return out;
  }

 private:
  OperatorWeight() = default;

  std::size_t d_ = 1;
  std::string name_;
  std::vector<std::vector<WeightTerm>> terms_;
  double beta_max_ = 0.0;
  std::optional<Weight> scalar_;
  std::optional<MatrixFn> custom_;
};

inline double log_operator_weight_norm(const VectorFunction& F, const OperatorWeight& W, double p) {
  if (!(p >= 1.0)) throw InvalidInput("p must be >= 1");
  if (F.dim() != W.dim()) throw InvalidInput("function and weight dimensions differ");
  std::vector<double> terms;
  const std::size_t n = F.size();
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXcd v = F.values.col(static_cast<Eigen::Index>(i));
    if (v.isZero(0.0)) continue;
    double l = W.log_apply_norm(F.grid.at(i), v);
    if (!std::isfinite(l)) continue;
    terms.push_back(p * l + std::log(detail::trapezoid_weight(i, n, F.grid.step)));
  }
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  return detail::log_sum_exp(terms) / p;
}

// (int ||W(x) F(x)||^p dx)^{1/p}, accumulated in log space.
inline double operator_weight_norm(const VectorFunction& F, const OperatorWeight& W, double p) {
  double l = log_operator_weight_norm(F, W, p);
  if (l > kLogMax) throw OverflowError("operator-weighted norm exceeds double range");
  return std::exp(l);
}

// Admissibility of x -> ||W(x)|| as a scalar weight.
inline AdmissibilityReport check_operator_weight(const OperatorWeight& W, const std::vector<double>& offsets, const Grid& grid,
                                                 const AdmissibilityOptions& opt = {}) {
  return check_admissibility(W.norm_weight(), offsets, grid, opt);
}

// ---------------------------------------------------------------- spaces and operators

// L^p(R+, C^d) weighted by a scalar weight (omega ||F||) or by an operator weight (||W F||).
struct VectorSpace {
  double p = 2.0;
  Weight weight = Weight::constant();
  std::optional<OperatorWeight> W;

  static VectorSpace lp(double p, Weight w = Weight::constant()) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("p must lie in [1, inf)");
    return VectorSpace{p, std::move(w), std::nullopt};
  }
  static VectorSpace operator_weighted(double p, OperatorWeight W) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("p must lie in [1, inf)");
    return VectorSpace{p, Weight::constant(), std::move(W)};
  }

  double norm(const VectorFunction& F) const { return W ? operator_weight_norm(F, *W, p) : vector_lp_norm(F, p, weight); }

  // The scalar space on which the scalarized operators act: L^p_omega or L^p_{||W||}.
  SpaceSpec scalar_space() const { return SpaceSpec::lp(p, W ? W->norm_weight() : weight); }
};

struct MatrixKernel {
  std::size_t d = 1;
  std::vector<SampledFunction> entries;  // row-major Phi_{jk}

  MatrixKernel() = default;
  MatrixKernel(std::size_t d_, std::vector<SampledFunction> e) : d(d_), entries(std::move(e)) {
    if (d < 1 || entries.size() != d * d) throw InvalidInput("matrix kernel needs d*d entries");
    for (auto& s : entries)
      if (!(s.grid == entries.front().grid)) throw InvalidInput("matrix kernel entries must share one grid");
  }

  const SampledFunction& entry(std::size_t j, std::size_t k) const { return entries[j * d + k]; }
  const Grid& grid() const { return entries.front().grid; }

  static MatrixKernel sample(std::size_t d, const Grid& g, const std::function<cplx(std::size_t, std::size_t, double)>& fn) {
    std::vector<SampledFunction> e;
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k) e.push_back(SampledFunction::sample(g, [&](double x) { return fn(j, k, x); }));
    return MatrixKernel(d, std::move(e));
  }

  static MatrixKernel diagonal(const std::vector<SampledFunction>& diag) {
    const std::size_t d = diag.size();
    if (d < 1) throw InvalidInput("matrix kernel needs d >= 1");
    std::vector<SampledFunction> e;
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k) e.push_back(j == k ? diag[j] : SampledFunction(diag.front().grid));
    return MatrixKernel(d, std::move(e));
  }

  static MatrixKernel identity(const SampledFunction& phi, std::size_t d) {
    return diagonal(std::vector<SampledFunction>(d, phi));
  }
};

// sum_{jk} conj(v_j) Phi_{jk} u_k: the kernel of the scalarized operator.
inline SampledFunction scalar_kernel(const MatrixKernel& phi, const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
  if (static_cast<std::size_t>(u.size()) != phi.d || static_cast<std::size_t>(v.size()) != phi.d)
    throw InvalidInput("pairing vectors have the wrong dimension");
  SampledFunction out(phi.grid());
  for (std::size_t j = 0; j < phi.d; ++j)
    for (std::size_t k = 0; k < phi.d; ++k) {
      cplx c = std::conj(v(static_cast<Eigen::Index>(j))) * u(static_cast<Eigen::Index>(k));
      if (c == cplx(0.0)) continue;
      const auto& e = phi.entry(j, k);
      for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += c * e.values[i];
    }
  return out;
}

struct VectorOperator {
  enum class Kind { kernel, shift, black_box };
  using ApplyFn = std::function<VectorFunction(const VectorFunction&)>;

  Kind kind = Kind::kernel;
  std::size_t d = 1;
  MatrixKernel phi;
  double shift = 0.0;
  ApplyFn apply;
  VectorSpace space = VectorSpace::lp(2.0);
  std::string name;

  static VectorOperator kernel(MatrixKernel phi, VectorSpace space = VectorSpace::lp(2.0), std::string name = "matrix_kernel") {
    VectorOperator t;
    t.kind = Kind::kernel;
    t.d = phi.d;
    t.phi = std::move(phi);
    t.space = std::move(space);
    t.name = std::move(name);
    return t;
  }
  static VectorOperator shift_by(double a, std::size_t d, VectorSpace space = VectorSpace::lp(2.0)) {
    VectorOperator t;
    t.kind = Kind::shift;
    t.d = d;
    t.shift = a;
    t.space = std::move(space);
    std::ostringstream os;
    os << "vector_shift(" << a << ")";
    t.name = os.str();
    return t;
  }
  static VectorOperator black_box(std::size_t d, ApplyFn fn, VectorSpace space = VectorSpace::lp(2.0),
                                  std::string name = "vector_black_box") {
    VectorOperator t;
    t.kind = Kind::black_box;
    t.d = d;
    t.apply = std::move(fn);
    t.space = std::move(space);
    t.name = std::move(name);
    return t;
  }
};

// (T F)_j = sum_k P+(Phi_{jk} * F_k), or the componentwise shift.
inline VectorFunction apply_vector(const VectorOperator& t, const VectorFunction& F) {
  if (F.dim() != t.d) throw InvalidInput("vector function dimension does not match the operator");
  switch (t.kind) {
    case VectorOperator::Kind::kernel: {
      std::vector<SampledFunction> out(t.d, SampledFunction(F.grid));
      std::vector<SampledFunction> comp;
      for (std::size_t k = 0; k < t.d; ++k) comp.push_back(F.component(k));
      for (std::size_t j = 0; j < t.d; ++j)
        for (std::size_t k = 0; k < t.d; ++k) {
          const auto& e = t.phi.entry(j, k);
          if (e.is_zero() || comp[k].is_zero()) continue;
          out[j] = out[j] + convolve_truncate(e, comp[k], ConvolutionMethod::direct);
        }
      return VectorFunction::from_components(out);
    }
    case VectorOperator::Kind::shift: return apply_vector_shift(F, t.shift);
    case VectorOperator::Kind::black_box: {
      VectorFunction r = t.apply(F);
      if (!(r.grid == F.grid) || r.dim() != F.dim()) throw InvalidInput("black-box vector operator changed the grid");
      return r;
    }
  }
  return F;
}

// T_{u,v} f = <T(f u)(.), v>, as a black box on the scalar space.
inline WienerHopfOperator scalarize(const VectorOperator& t, const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) {
  if (static_cast<std::size_t>(u.size()) != t.d || static_cast<std::size_t>(v.size()) != t.d)
    throw InvalidInput("pairing vectors have the wrong dimension");
  if (u.norm() == 0.0 || v.norm() == 0.0) throw InvalidInput("scalarization needs non-zero u and v");
  VectorOperator inner_t = t;
  Eigen::VectorXcd uu = u, vv = v;
  return WienerHopfOperator::black_box(
      [inner_t, uu, vv](const SampledFunction& f) { return apply_vector(inner_t, VectorFunction::tensor(f, uu)).pair_with(vv); },
      t.space.scalar_space(), "scalarized(" + t.name + ")");
}

// Matrix kernel of a kernel or shift operator; black boxes are probed with
// discrete spikes through their basis scalarizations.
inline MatrixKernel matrix_kernel_of(const VectorOperator& t, double h, const std::optional<Grid>& window = std::nullopt,
                                     const std::optional<Grid>& probe_grid = std::nullopt, double x0 = 0.0) {
  switch (t.kind) {
    case VectorOperator::Kind::kernel: return t.phi;
    case VectorOperator::Kind::shift: return MatrixKernel::identity(shift_kernel(t.shift, h), t.d);
    case VectorOperator::Kind::black_box: {
      if (!window || !probe_grid) throw InvalidInput("black-box vector operator needs a probe grid and kernel window");
      std::vector<SampledFunction> e;
      for (std::size_t j = 0; j < t.d; ++j)
        for (std::size_t k = 0; k < t.d; ++k)
          e.push_back(impulse_kernel(scalarize(t, basis_vector(t.d, k), basis_vector(t.d, j)), *probe_grid, x0, *window));
      return MatrixKernel(t.d, std::move(e));
    }
  }
  return t.phi;
}

// ---------------------------------------------------------------- operator symbols

struct OperatorSymbol {
  double a = 0.0;
  std::size_t d = 1;
  Grid freq_grid;
  double spatial_origin = 0.0;
  std::vector<Eigen::MatrixXcd> V;  // one d x d matrix per frequency node

  std::size_t size() const { return V.size(); }
  double xi(std::size_t k) const { return freq_grid.at(k); }

  FrequencyFunction entry(std::size_t j, std::size_t k) const {
    CVec v(size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = V[i](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    return FrequencyFunction(freq_grid, spatial_origin, std::move(v));
  }

  // xi -> <V_a(xi) u, v>
  FrequencyFunction form(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
    CVec out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = inner(V[i] * u, v);
    return FrequencyFunction(freq_grid, spatial_origin, std::move(out));
  }

  // max over nodes of ||V_a(xi)||
  double sup_norm() const {
    double m = 0.0;
    for (auto& M : V) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.adjoint() * M, Eigen::EigenvaluesOnly);
      m = std::max(m, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())));
    }
    return m;
  }
};

// Entrywise symbol_of_kernel, assembled into a matrix per frequency node.
inline OperatorSymbol vector_symbol(const MatrixKernel& phi, double a, std::size_t count = 0, const StripSpec* strip = nullptr) {
  OperatorSymbol s;
  s.a = a;
  s.d = phi.d;
  const auto n = static_cast<Eigen::Index>(phi.d);
  for (std::size_t j = 0; j < phi.d; ++j)
    for (std::size_t k = 0; k < phi.d; ++k) {
      FrequencyFunction nu = symbol_of_kernel(phi.entry(j, k), a, count, strip);
      if (s.V.empty()) {
        s.freq_grid = nu.freq_grid;
        s.spatial_origin = nu.spatial_origin;
        s.V.assign(nu.size(), Eigen::MatrixXcd::Zero(n, n));
      }
      for (std::size_t i = 0; i < nu.size(); ++i) s.V[i](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = nu.values[i];
    }
  return s;
}

struct VectorRepresentationReport {
  std::vector<double> residuals;
  double max_residual = 0.0;
  double transform_pairing_defect = 0.0;  // max |F(<G,v>) - <F(G),v>| / max |F(G)|
  double tol = 1e-5;
  bool pass = true;
};

// r(F) = ||(TF)_a - P+ F^{-1}(V_a (F)_a^)|| / ||(TF)_a|| in L^2(R+, C^d).
inline VectorRepresentationReport vector_representation_check(const VectorOperator& t, const OperatorSymbol& V,
                                                              const std::vector<VectorFunction>& probes, double tol = 1e-5) {
  VectorRepresentationReport rep;
  rep.tol = tol;
  const std::size_t n = V.size();
  const double h = 2.0 * std::numbers::pi / (static_cast<double>(V.freq_grid.count) * V.freq_grid.step);
  const auto d = static_cast<Eigen::Index>(t.d);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  for (const auto& F : probes) {
    if (F.dim() != t.d) throw InvalidInput("probe dimension does not match the operator");
    for (std::size_t j = 0; j < t.d; ++j) detail::check_probe(F.component(j).is_zero() ? F.norm_profile() : F.component(j), h);
    if (n < F.size()) throw GridError("symbol grid shorter than the probe grid");
    VectorFunction lhs = twist(apply_vector(t, F), V.a);
    std::vector<FrequencyFunction> hat;
    for (Eigen::Index k = 0; k < d; ++k) hat.push_back(forward_transform(twist(F.component(static_cast<std::size_t>(k)).padded_to(n), V.a)));

    Eigen::VectorXcd v(d);
    for (Eigen::Index k = 0; k < d; ++k) v(k) = cplx(nd(rng), nd(rng));
    FrequencyFunction paired = forward_transform(twist(F.pair_with(v).padded_to(n), V.a));
    double scale = 0.0, defect = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        s += hat[static_cast<std::size_t>(k)].values[i] * std::conj(v(k));
        scale = std::max(scale, std::abs(hat[static_cast<std::size_t>(k)].values[i]));
      }
      defect = std::max(defect, std::abs(paired.values[i] - s));
    }
    if (scale > 0.0) rep.transform_pairing_defect = std::max(rep.transform_pairing_defect, defect / (scale * v.norm()));

    std::vector<SampledFunction> rhs;
    for (Eigen::Index j = 0; j < d; ++j) {
      FrequencyFunction G(V.freq_grid, hat.front().spatial_origin, CVec(n, cplx(0.0)));
      for (std::size_t i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < d; ++k) G.values[i] += V.V[i](j, k) * hat[static_cast<std::size_t>(k)].values[i];
      SampledFunction full = inverse_transform(G);
      rhs.emplace_back(F.grid, CVec(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(F.size())));
    }
    VectorFunction R = VectorFunction::from_components(rhs);
    double num = vector_lp_norm(lhs - R, 2.0), den = vector_lp_norm(lhs, 2.0);
    double r = den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0);
    rep.residuals.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  rep.pass = rep.max_residual <= tol;
  return rep;
}

// ---------------------------------------------------------------- vector shift radii

namespace detail {

// log ||S_n (delta_x u)|| - log ||delta_x u|| in L^p_omega(R+, C^d), node x interior.
inline double vector_delta_log_ratio(const Weight& w, double p, double n, double x, const Eigen::VectorXcd& u) {
  const double m = std::abs(n);
  const double start = n >= 0.0 ? x : x + m;  // probe position
  Grid g(x - 1.0, 1.0, static_cast<std::size_t>(std::llround(m)) + 3);
  VectorFunction F(g, static_cast<std::size_t>(u.size()));
  F.values.col(static_cast<Eigen::Index>(std::llround(start - g.origin))) = u;
  return log_vector_lp_norm(apply_vector_shift(F, n), p, w) - log_vector_lp_norm(F, p, w);
}

// sup_x of the vector delta ratio, scanned as in sampled_log_ratio_sup.
inline double vector_log_shift_norm(const Weight& w, double p, double n, const Eigen::VectorXcd& u, const SupRange& r) {
  auto g = [&](double x) { return vector_delta_log_ratio(w, p, n, x, u); };
  auto steps = static_cast<std::size_t>(std::ceil((r.max_x - r.min_x) / r.coarse_step));
  double best = -std::numeric_limits<double>::infinity(), arg = r.min_x;
  for (std::size_t i = 0; i <= steps; ++i) {
    double x = std::min(r.min_x + r.coarse_step * static_cast<double>(i), r.max_x);
    double v = g(x);
    if (v > best) { best = v; arg = x; }
  }
  double lo = std::max(r.min_x, arg - r.coarse_step), hi = std::min(r.max_x, arg + r.coarse_step);
  if (hi > lo) best = std::max(best, golden_max(g, lo, hi));
  return best;
}

}  // namespace detail

struct VectorRadiusReport {
  std::size_t d = 1;
  double forward = 0.0, backward = 0.0;                // rho(S), rho(S_{-1}) on the vector space
  double scalar_forward = 0.0, scalar_backward = 0.0;  // scalar values
  double max_rel_diff = 0.0;
  double tol = 1e-6;
  bool pass = true;
  std::vector<int> n;
  std::vector<double> log_rate_forward, log_rate_backward;
};

// Gelfand ladder for the vector shifts from unit-vector delta probes
// (||S_n F|| / ||F|| depends on F only through ||F(.)||_H), compared with the scalar radii.
inline VectorRadiusReport vector_spectral_radius(const Weight& w, std::size_t d, double p = 2.0,
                                                 const SpectralRadiusOptions& opt = {}, double tol = 1e-6,
                                                 std::uint64_t seed = 3) {
  if (d < 1) throw InvalidInput("d must be >= 1");
  VectorRadiusReport r;
  r.d = d;
  r.tol = tol;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd u(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = cplx(nd(rng), nd(rng));
  u.normalize();
  auto gelfand = [&](Direction dir, std::vector<double>& rates) {
    double best = INFINITY;
    r.n.clear();
    for (int n = 1; n <= opt.n_max; n *= 2) {
      double l = detail::vector_log_shift_norm(w, p, dir == Direction::forward ? n : -n, u, opt.range) / n;
      r.n.push_back(n);
      rates.push_back(l);
      best = std::min(best, l);
    }
    double est = rates.back();
    if (rates.size() >= 2) est = 2.0 * rates[rates.size() - 1] - rates[rates.size() - 2];
    return std::exp(std::min(est, best));
  };
  r.forward = gelfand(Direction::forward, r.log_rate_forward);
  r.backward = gelfand(Direction::backward, r.log_rate_backward);
  r.scalar_forward = spectral_radius(w, p, Direction::forward, opt).estimate;
  r.scalar_backward = spectral_radius(w, p, Direction::backward, opt).estimate;
  r.max_rel_diff = std::max(std::abs(r.forward - r.scalar_forward) / r.scalar_forward,
                            std::abs(r.backward - r.scalar_backward) / r.scalar_backward);
  r.pass = r.max_rel_diff <= tol;
  return r;
}

// ||S_a F|| / ||F|| on L^p_omega(R+, C^d).
inline double vector_shift_ratio(const VectorFunction& F, double a, const Weight& w, double p = 2.0) {
  return std::exp(log_vector_lp_norm(apply_vector_shift(F, a), p, w) - log_vector_lp_norm(F, p, w));
}

// ---------------------------------------------------------------- vector annulus

inline double vector_quasi_residual(const VectorFunction& F, cplx lambda, const Weight& w, Direction dir, double p = 2.0) {
  VectorFunction sf = apply_vector_shift(F, dir == Direction::forward ? 1.0 : -1.0);
  VectorFunction diff(F.grid, sf.values - lambda * F.values);
  return std::exp(log_vector_lp_norm(diff, p, w) - log_vector_lp_norm(F, p, w));
}

struct VectorAnnulusContext {
  AnnulusContext scalar;
  std::size_t d = 1;
  Eigen::VectorXcd u;          // unit direction of the lifted witnesses
  ShiftPowers forward, backward;  // log ||S^n|| on the vector space
};

inline VectorAnnulusContext vector_annulus_context(const Weight& w, std::size_t d, const AnnulusOptions& opt = {},
                                                   std::uint64_t seed = 5) {
  VectorAnnulusContext c{annulus_context(w, opt), d, {}, {}, {}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  c.u.resize(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < c.u.size(); ++i) c.u(i) = cplx(nd(rng), nd(rng));
  c.u.normalize();
  auto powers = [&](Direction dir) {
    ShiftPowers s;
    s.dir = dir;
    s.log_norm.assign(static_cast<std::size_t>(opt.neumann_terms) + 1, 0.0);
    for (int n = 1; n <= opt.neumann_terms; ++n)
      s.log_norm[static_cast<std::size_t>(n)] =
          detail::vector_log_shift_norm(w, 2.0, dir == Direction::forward ? n : -n, c.u, opt.radius.range);
    return s;
  };
  c.forward = powers(Direction::forward);
  c.backward = powers(Direction::backward);
  return c;
}

// Annulus certificate for the vector shifts: section witnesses lifted to
// f u with residuals recomputed in L^2_omega(R+, C^d); Neumann bounds from the
// vector shift powers.
inline SpectralCertificate vector_annulus_certificate(cplx lambda, const VectorAnnulusContext& ctx, const AnnulusOptions& opt = {}) {
  AnnulusContext sc = ctx.scalar;
  sc.forward = ctx.forward;
  sc.backward = ctx.backward;
  SpectralCertificate c = annulus_certificate(lambda, sc, opt);
  if (!c.primary) return c;
  auto lift = [&](SideResult& s, Direction dir) {
    s.residual = vector_quasi_residual(VectorFunction::tensor(s.witness, ctx.u), s.lambda, ctx.scalar.weight, dir);
  };
  lift(*c.primary, Direction::forward);
  lift(*c.companion, Direction::backward);
  bool a = c.primary->residual <= opt.inside_tol, b = c.companion->residual <= opt.inside_tol;
  c.companion_agrees = a == b;
  c.kind = a && b ? CertificateKind::inside : CertificateKind::inconclusive;
  return c;
}

// ---------------------------------------------------------------- operator-weighted pipeline

struct PipelineOptions {
  std::size_t n_levels = 21;
  std::size_t count = 0;          // symbol padding; 0 = probe grid count
  Grid probe_grid{0.0, 0.01, 8001};
  std::size_t probes = 3;
  std::size_t random_pairs = 20;
  double representation_tol = 1e-5;
  double scalarization_tol = 1e-6;
  std::vector<double> admissibility_offsets{0.5, 1.0, 2.0, 4.0};
  Grid admissibility_grid{0.0, 1.0 / 64.0, 64 * 64 + 1};
  SpectralRadiusOptions radius{};
  std::uint64_t seed = 11;
};

struct ComponentStrip {
  std::size_t index = 0;
  double a_min = 0.0, a_max = 0.0;
};

struct PipelineLevel {
  OperatorSymbol symbol;
  double representation = 0.0;
  double transform_pairing_defect = 0.0;
  double scalarization = 0.0;  // max |<V_a u, v> - symbol of T_{u,v}| / sup ||V_a||
};

struct PipelineReport {
  StripSpec strip;  // I_W from x -> ||W(x)||
  AdmissibilityReport admissibility;
  std::vector<PipelineLevel> levels;
  std::vector<ComponentStrip> components;  // diagonal weights only
  std::optional<std::pair<double, double>> component_intersection;
  std::string notice;
  double max_representation = 0.0;
  double max_scalarization = 0.0;
  bool pass = true;
};

namespace detail {

// Smooth random vector probe supported in [lo, hi].
inline VectorFunction random_vector_probe(const Grid& g, std::size_t d, double lo, double hi, std::mt19937_64& rng) {
  std::vector<SampledFunction> c;
  for (std::size_t j = 0; j < d; ++j) c.push_back(random_probe(g, lo, hi, rng));
  return VectorFunction::from_components(c);
}

inline std::vector<double> check_levels(const StripSpec& s) {
  if (s.levels.size() <= 3) return s.levels;
  return {s.levels.front(), s.levels[s.levels.size() / 2], s.levels.back()};
}

}  // namespace detail

// I_W from ||W||, V_a by entrywise symbols, and per level: the scalarization
// identity against symbols of the black-box T_{u,v} (basis pairs plus random
// pairs) and the vector representation residual.
inline PipelineReport operator_weight_pipeline(const VectorOperator& t, const OperatorWeight& W, double p,
                                               const PipelineOptions& opt = {}) {
  if (W.dim() != t.d) throw InvalidInput("operator weight and operator dimensions differ");
  PipelineReport rep;
  rep.admissibility = check_operator_weight(W, opt.admissibility_offsets, opt.admissibility_grid);
  if (!rep.admissibility.pass) throw WeightError("||W|| is not an admissible weight: " + rep.admissibility.diagnostic);
  Weight nw = W.norm_weight();
  rep.strip = strip_for_weight(nw, p, opt.n_levels, opt.radius);
  if (rep.strip.degenerate()) rep.notice = "I_W is a single level; analyticity in a is vacuous";

  if (auto diag = W.diagonal_weights()) {
    double lo = -INFINITY, hi = INFINITY;
    for (std::size_t i = 0; i < diag->size(); ++i) {
      StripSpec s = strip_for_weight((*diag)[i], p, 2, opt.radius);
      rep.components.push_back({i, s.a_min, s.a_max});
      lo = std::max(lo, s.a_min);
      hi = std::min(hi, s.a_max);
    }
    if (hi >= lo - kDegenerateWidth) {
      rep.component_intersection = std::make_pair(lo, hi);
    } else {
      std::ostringstream os;
      os << (rep.notice.empty() ? "" : "; ") << "component strips do not intersect (" << lo << " > " << hi
         << "); symbols live on different validity strips";
      rep.notice += os.str();
    }
  }

  const Grid& g = opt.probe_grid;
  const double h = g.step;
  VectorOperator tw = t;
  tw.space = VectorSpace::operator_weighted(p, W);
  MatrixKernel phi = matrix_kernel_of(tw, h);
  const Grid& kg = phi.grid();
  const std::size_t count = opt.count ? opt.count : fast_length(g.count + kg.count);
  // impulse position leaving room for the kernel window on both sides
  double x0 = std::ceil((std::max(0.0, -kg.origin) + 1.0) / h) * h;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  std::vector<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>> pairs;
  for (std::size_t j = 0; j < t.d; ++j)
    for (std::size_t k = 0; k < t.d; ++k) pairs.emplace_back(basis_vector(t.d, k), basis_vector(t.d, j));
  for (std::size_t r = 0; r < opt.random_pairs; ++r) {
    Eigen::VectorXcd u(static_cast<Eigen::Index>(t.d)), v(static_cast<Eigen::Index>(t.d));
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u(i) = cplx(nd(rng), nd(rng));
      v(i) = cplx(nd(rng), nd(rng));
    }
    pairs.emplace_back(u, v);
  }
  std::vector<SampledFunction> scalar_kernels;
  for (auto& [u, v] : pairs) scalar_kernels.push_back(impulse_kernel(scalarize(tw, u, v), g, x0, kg));

  std::vector<VectorFunction> probes;
  double lo = std::max(1.0, 0.05 * g.end()), hi = 0.5 * g.end();
  for (std::size_t i = 0; i < opt.probes; ++i) probes.push_back(detail::random_vector_probe(g, t.d, lo, hi, rng));

  for (double a : detail::check_levels(rep.strip)) {
    PipelineLevel L;
    L.symbol = vector_symbol(phi, a, count, &rep.strip);
    double sup = std::max(L.symbol.sup_norm(), std::numeric_limits<double>::min());
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      FrequencyFunction form = L.symbol.form(pairs[q].first, pairs[q].second);
      FrequencyFunction ref = symbol_of_kernel(scalar_kernels[q], a, count);
      double scale = sup * pairs[q].first.norm() * pairs[q].second.norm();
      for (std::size_t i = 0; i < form.size(); ++i)
        L.scalarization = std::max(L.scalarization, std::abs(form.values[i] - ref.values[i]) / scale);
    }
    VectorRepresentationReport vr = vector_representation_check(tw, L.symbol, probes, opt.representation_tol);
    L.representation = vr.max_residual;
    L.transform_pairing_defect = vr.transform_pairing_defect;
    rep.max_representation = std::max(rep.max_representation, L.representation);
    rep.max_scalarization = std::max(rep.max_scalarization, L.scalarization);
    rep.levels.push_back(std::move(L));
  }
  rep.pass = rep.max_representation <= opt.representation_tol && rep.max_scalarization <= opt.scalarization_tol;
  return rep;
}

}  // namespace whlab
