#pragma once

#include <fftw3.h>

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "io.hpp"
#include "norms.hpp"
#include "recovery.hpp"
#include "spectra.hpp"
#include "symbol.hpp"
#include "vector.hpp"

namespace whlab::experiments {

using json = nlohmann::json;
using io::Table;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportFormat = "whlab-report/1";

struct Verdict {
  std::string name;
  std::string invariant;
  double measured = 0.0;
  std::string relation;  // "<=", ">=" or "=="
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

inline Verdict at_most(std::string name, std::string invariant, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), std::move(invariant), measured, "<=", threshold, measured <= threshold, std::move(detail)};
}

inline Verdict at_least(std::string name, std::string invariant, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), std::move(invariant), measured, ">=", threshold, measured >= threshold, std::move(detail)};
}

struct Outcome {
  std::vector<Verdict> verdicts;
  std::vector<Table> tables;
  std::vector<Table> plotdata;
  std::vector<std::pair<std::string, std::string>> extra_files;  // relative path, contents
  std::vector<std::string> notes;

  bool pass() const {
    for (auto& v : verdicts)
      if (!v.pass) return false;
    return !verdicts.empty();
  }
};

// ---------------------------------------------------------------- configuration

using KernelFactory = std::function<SampledFunction(double)>;

struct OperatorConfig {
  std::string kind = "kernel";  // kernel | shift | identity
  double shift = 0.0;
  KernelFactory kernel;

  // Kernel on the step-h lattice: the sampled kernel or the discrete unit mass.
  SampledFunction kernel_at(double h) const {
    if (kind == "kernel") return kernel(h);
    return shift_kernel(kind == "shift" ? shift : 0.0, h);
  }

  WienerHopfOperator build(double h, const SpaceSpec& space) const {
    if (kind == "shift") return WienerHopfOperator::shift_by(shift, space);
    if (kind == "identity") return WienerHopfOperator::identity(space);
    return WienerHopfOperator::kernel(kernel(h), space);
  }

  std::string describe() const { return kind == "shift" ? "shift(" + io::num(shift) + ")" : kind; }
};

struct Config {
  json effective;  // after command-line overrides; hashed
  std::string experiment;
  std::filesystem::path base_dir;
  std::string out_dir = "whlab_out";
  std::uint64_t seed = 7;

  Weight weight = Weight::constant();
  double p = 2.0;
  std::optional<OrliczFunction> orlicz;
  bool has_space = false;

  double span = 80.0, step = 0.01;
  std::optional<OperatorConfig> op;

  json tolerances = json::object();
  json params = json::object();

  Grid grid() const { return Grid(0.0, step, static_cast<std::size_t>(std::llround(span / step)) + 1); }
  SpaceSpec space() const {
    if (orlicz) return SpaceSpec::weighted_orlicz(*orlicz, weight);
    return SpaceSpec::lp(p, weight);
  }
  std::string hash() const { return io::fnv1a64(effective.dump()); }
};

inline const std::vector<std::pair<std::string, std::string>>& experiment_names() {
  static const std::vector<std::pair<std::string, std::string>> e{
      {"symbol", "nu_a tables over the strip, representation residuals, analyticity; params: levels, probes, xi_max, "
                 "control (none | corrupt_symbol | non_analytic), strip_bound, norm_step"},
      {"annulus", "inside/outside certificates on a polar lambda grid; params: d (1 or 2), radii, angles, step, ladder"},
      {"cutoff", "smooth cut-off f with bounds on int_{R\\V}|f^|, int|f^| and |f(t0)|; params: requests [{eps, c0, eta0, delta}]"},
      {"inclusion", "symbol values phi^(alpha) as approximate eigenvalues; params: alphas [[re, im], ...], plateaus"},
      {"vector-symbol", "operator-valued symbols on L^p_W; params: d, matrix_kernel, vector_operator, operator_weight, "
                        "random_pairs, probes, levels"},
      {"weights-report", "admissibility, translation norms, spectral radii, strip; params: offsets, admissibility_span, "
                         "n_max, d, orlicz_samples"},
  };
  return e;
}

inline OperatorConfig parse_operator(const json& j, const std::string& ptr, double h, const std::filesystem::path& base) {
  OperatorConfig op;
  op.kind = io::string(j, "kind", ptr, std::nullopt, {"kernel", "shift", "identity"});
  if (op.kind == "kernel") {
    io::reject_unknown(j, ptr, {"kind", "kernel"});
    json kj = io::require(j, "kernel", ptr);
    std::string kp = io::child(ptr, "kernel");
    io::parse_kernel(kj, kp, h, base);  // validate now
    op.kernel = [kj, kp, base](double step) { return io::parse_kernel(kj, kp, step, base); };
  } else if (op.kind == "shift") {
    io::reject_unknown(j, ptr, {"kind", "a"});
    op.shift = io::number(j, "a", ptr, 1.0, io::Range::at_least(0.0));
    double k = op.shift / h;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) throw ConfigError(io::child(ptr, "a"), "shift is not a multiple of the grid step");
  } else {
    io::reject_unknown(j, ptr, {"kind"});
  }
  return op;
}

inline Config parse_config(const json& j, const std::filesystem::path& base_dir = ".") {
  io::reject_unknown(j, "", {"experiment", "space", "grid", "operator", "tolerances", "output", "seed", "params"});
  Config c;
  c.effective = j;
  c.base_dir = base_dir;
  c.experiment = io::string(j, "experiment", "", std::nullopt,
                            {"symbol", "annulus", "cutoff", "inclusion", "vector-symbol", "weights-report"});
  c.seed = static_cast<std::uint64_t>(io::integer(j, "seed", "", 7, 0, std::numeric_limits<long long>::max()));
  if (j.contains("space")) {
    const json& s = j["space"];
    io::reject_unknown(s, "/space", {"weight", "p", "orlicz"});
    c.has_space = true;
    if (s.contains("weight")) c.weight = io::parse_weight(s["weight"], "/space/weight");
    c.p = io::number(s, "p", "/space", 2.0, io::Range::at_least(1.0));
    if (s.contains("orlicz")) {
      if (s.contains("p")) throw ConfigError("/space/p", "give either p or orlicz, not both");
      c.orlicz = io::parse_orlicz(s["orlicz"], "/space/orlicz");
    }
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    io::reject_unknown(g, "/grid", {"span", "step"});
    c.span = io::number(g, "span", "/grid", 80.0, io::Range::positive());
    c.step = io::number(g, "step", "/grid", 0.01, io::Range::positive());
    double n = c.span / c.step;
    if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n)) throw ConfigError("/grid/span", "span is not a multiple of the step");
    if (n < 8.0) throw ConfigError("/grid/span", "grid needs at least 8 steps");
    if (n > 5e6) throw ConfigError("/grid/span", "grid has more than 5e6 nodes");
  }
  if (j.contains("operator")) c.op = parse_operator(j["operator"], "/operator", c.step, base_dir);
  if (j.contains("tolerances")) {
    io::require_object(j["tolerances"], "/tolerances");
    for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it)
      io::as_number(*it, io::child("/tolerances", it.key()), io::Range::positive());
    c.tolerances = j["tolerances"];
  }
  if (j.contains("output")) {
    io::reject_unknown(j["output"], "/output", {"dir"});
    c.out_dir = io::string(j["output"], "dir", "/output", c.out_dir);
  }
  if (j.contains("params")) {
    io::require_object(j["params"], "/params");
    c.params = j["params"];
  }
  return c;
}

// Tolerance lookup; unknown names are rejected when the experiment is prepared.
inline double tolerance(const Config& c, const std::string& name, double def) {
  auto it = c.tolerances.find(name);
  return it == c.tolerances.end() ? def : it->get<double>();
}

inline void check_tolerance_names(const Config& c, std::initializer_list<const char*> allowed) {
  io::reject_unknown(c.tolerances, "/tolerances", allowed);
}

inline void require_space(const Config& c) {
  if (!c.has_space) throw ConfigError("/space", "this experiment needs a space");
}

inline void require_l2(const Config& c, const char* what) {
  require_space(c);
  if (c.orlicz) throw ConfigError("/space/orlicz", std::string(what) + " needs an L^2 space");
  if (c.p != 2.0) throw ConfigError("/space/p", std::string(what) + " needs p = 2");
}

inline const OperatorConfig& require_operator(const Config& c) {
  if (!c.op) throw ConfigError("/operator", "this experiment needs an operator");
  return *c.op;
}

// ---------------------------------------------------------------- helpers

namespace detail {

inline std::vector<std::string> row(std::initializer_list<double> v) {
  std::vector<std::string> r;
  for (double x : v) r.push_back(io::num(x));
  return r;
}

// Indices of the nodes with |xi| <= xi_max, thinned to at most `keep`.
inline std::vector<std::size_t> plot_nodes(const Grid& fg, double xi_max, std::size_t keep) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < fg.count; ++k)
    if (std::abs(fg.at(k)) <= xi_max) idx.push_back(k);
  if (idx.size() <= keep) return idx;
  std::vector<std::size_t> out;
  const std::size_t stride = (idx.size() + keep - 1) / keep;
  for (std::size_t i = 0; i < idx.size(); i += stride) out.push_back(idx[i]);
  return out;
}

inline cplx parse_complex(const json& j, const std::string& ptr) {
  if (j.is_number()) return io::as_number(j, ptr);
  if (!j.is_array() || j.size() != 2) throw ConfigError(ptr, "expected a number or [re, im]");
  return {io::as_number(j[0], io::child(ptr, 0)), io::as_number(j[1], io::child(ptr, 1))};
}

}  // namespace detail

// A parsed experiment, ready to run.
using Runner = std::function<Outcome()>;

// ---------------------------------------------------------------- symbol

inline Runner prepare_symbol(const Config& c) {
  const std::string P = "/params";
  io::reject_unknown(c.params, P, {"levels", "probes", "xi_max", "control", "strip_bound", "norm_step"});
  check_tolerance_names(c, {"representation", "analyticity", "consistency", "strip_bound"});
  require_space(c);
  const OperatorConfig op = require_operator(c);
  const auto levels = static_cast<std::size_t>(io::integer(c.params, "levels", P, 21, 1, 201));
  const auto nprobes = static_cast<std::size_t>(io::integer(c.params, "probes", P, 5, 1, 100));
  const double xi_max = io::number(c.params, "xi_max", P, 20.0, io::Range::positive());
  const std::string control = io::string(c.params, "control", P, "none", {"none", "corrupt_symbol", "non_analytic"});
  const bool strip_bound = io::boolean(c.params, "strip_bound", P, false);
  const double norm_step = io::number(c.params, "norm_step", P, 0.05, io::Range::positive());
  if (strip_bound) require_l2(c, "the strip bound");
  const double tol_rep = tolerance(c, "representation", 1e-5);
  const double tol_cr = tolerance(c, "analyticity", 1e-4);
  const double tol_cons = tolerance(c, "consistency", 1e-6);
  const double tol_sb = tolerance(c, "strip_bound", 1e-3);

  return [=]() {
    Outcome out;
    const Grid g = c.grid();
    const double h = g.step;
    const SpaceSpec space = c.space();
    SampledFunction phi = op.kernel_at(h);
    WienerHopfOperator t = op.build(h, space);
    StripSpec strip = strip_for_weight(c.weight, c.orlicz ? 2.0 : c.p, levels);
    const std::size_t count = fast_length(g.count + phi.size());

    std::mt19937_64 rng(c.seed);
    std::vector<SampledFunction> probes;
    for (std::size_t i = 0; i < nprobes; ++i) probes.push_back(whlab::detail::random_probe(g, 1.0, 0.5 * g.end(), rng));

    Table lv{"symbol_levels", {"a", "max_residual", "sup_abs_nu"}, {}};
    Table plot{"symbol", {"a", "xi", "re", "im"}, {}};
    double worst = 0.0;
    for (double a : strip.levels) {
      FrequencyFunction nu = symbol_of_kernel(phi, a, count, &strip);
      for (auto k : detail::plot_nodes(nu.freq_grid, xi_max, 401))
        plot.add(detail::row({a, nu.xi(k), nu.values[k].real(), nu.values[k].imag()}));
      if (control == "corrupt_symbol")
        for (auto& v : nu.values) v *= 1.001;
      RepresentationReport rep = verify_representation(t, nu, a, probes, tol_rep);
      worst = std::max(worst, rep.max_residual);
      lv.add(detail::row({a, rep.max_residual, nu.max_abs()}));
    }
    out.verdicts.push_back(at_most("representation", "(Tf)_a = P+ F^-1(nu_a (f)_a^) on every stored level", worst, tol_rep,
                                   std::to_string(nprobes) + " probes, " + std::to_string(strip.levels.size()) + " levels" +
                                       (control == "corrupt_symbol" ? ", control: symbols scaled by 1.001" : "")));

    SymbolTable table = build_symbol_table(phi, strip, count, op.describe());
    if (control == "non_analytic") {
      if (table.nu.size() < 3) {
        out.verdicts.push_back({"analyticity", "a -> nu_a is the restriction of one analytic function", INFINITY, "<=", tol_cr, false,
                                "non_analytic control needs a strip with at least 3 levels"});
        out.tables = {lv};
        out.plotdata = {plot};
        return out;
      }
      for (auto& v : table.nu[table.nu.size() / 2].values) v *= 1.01;
    }
    AnalyticityOptions aopt;
    aopt.consistency_tol = tol_cons;
    aopt.cr_tol = tol_cr;
    aopt.xi_check = xi_max;
    AnalyticityReport ar = verify_analyticity(table, aopt);
    std::string adetail = ar.skipped ? ar.notice : "Cauchy-Riemann residual, " + std::to_string(ar.a_stencil) + "-point level stencil";
    if (control == "non_analytic") adetail += "; control: middle level scaled by 1.01";
    out.verdicts.push_back(at_most("analyticity", "d nu/da = i d nu/d xi across the strip", ar.cr_residual, tol_cr, adetail));
    if (ar.consistency_checked)
      out.verdicts.push_back(at_most("level_consistency", "stored nu_a equals phi^(xi + i a) evaluated directly", ar.consistency,
                                     tol_cons));
    if (ar.skipped) out.notes.push_back(ar.notice);

    if (strip_bound) {
      SampledFunction coarse = op.kernel_at(norm_step);
      Grid ng(0.0, norm_step, static_cast<std::size_t>(std::llround(1100.0 / norm_step)) + 1);
      OperatorNormResult nr = operator_norm(WienerHopfOperator::kernel(coarse, space), ng);
      StripBoundReport sb = verify_strip_bound(coarse, strip, nr.value, {levels, 81, xi_max, tol_sb});
      out.verdicts.push_back(at_most("strip_bound", "|phi^(alpha)| <= ||T|| on the alpha lattice in U_E", sb.ratio, 1.0 + tol_sb,
                                     "||T|| = " + io::num(nr.value) + " from finite sections at step " + io::num(norm_step)));
      Table sbt{"strip_bound", {"a", "xi", "abs_phi_hat"}, {}};
      for (std::size_t i = 0; i < sb.a.size(); ++i) sbt.add(detail::row({sb.a[i], sb.xi[i], sb.value[i]}));
      out.plotdata.push_back(sbt);
    }

    Table st{"strip", {"a_min", "a_max", "rho_forward", "rho_backward", "levels"}, {}};
    st.add(detail::row({strip.a_min, strip.a_max, strip.rho_forward, strip.rho_backward, static_cast<double>(strip.levels.size())}));
    out.tables = {st, lv};
    out.plotdata.insert(out.plotdata.begin(), plot);
    return out;
  };
}

// ---------------------------------------------------------------- annulus

inline Runner prepare_annulus(const Config& c) {
  const std::string P = "/params";
  io::reject_unknown(c.params, P, {"d", "radii", "angles", "step", "ladder"});
  check_tolerance_names(c, {"inside", "separation"});
  require_l2(c, "the annulus experiment");
  const auto d = static_cast<std::size_t>(io::integer(c.params, "d", P, 1, 1, 2));
  std::optional<std::vector<double>> radii;
  if (c.params.contains("radii")) radii = io::numbers(c.params, "radii", P, std::nullopt, {0.0, INFINITY, true});
  const auto angles = static_cast<std::size_t>(io::integer(c.params, "angles", P, 8, 1, 360));
  AnnulusOptions opt;
  opt.step = io::number(c.params, "step", P, opt.step, io::Range::positive());
  opt.ladder = io::numbers(c.params, "ladder", P, opt.ladder, io::Range::positive());
  opt.inside_tol = tolerance(c, "inside", 5e-2);
  const double sep = tolerance(c, "separation", 10.0);

  return [=]() {
    Outcome out;
    std::optional<AnnulusContext> sctx;
    std::optional<VectorAnnulusContext> vctx;
    if (d == 1) sctx = annulus_context(c.weight, opt);
    else vctx = vector_annulus_context(c.weight, d, opt, c.seed);
    const AnnulusContext& base = d == 1 ? *sctx : vctx->scalar;
    const double r_in = 1.0 / base.rho_backward, r_out = base.rho_forward;
    std::vector<double> rs = radii ? *radii
                                   : std::vector<double>{0.8 * r_in, r_in, std::sqrt(r_in * r_out), r_out, 1.2 * r_out};

    Table tab{"certificates",
              {"radius", "angle", "re", "im", "kind", "expected", "residual_S", "residual_S_-1", "residual_floor", "neumann_operator"},
              {}};
    Table ladder{"ladders", {"radius", "angle", "operator", "window", "residual", "plateau_residual"}, {}};
    double worst_inside = 0.0, best_floor = INFINITY;
    std::size_t inside_expected = 0, inside_ok = 0, outside_expected = 0, outside_ok = 0;
    for (double r : rs) {
      const bool expect_inside = r >= r_in * (1.0 - opt.boundary_slack) && r <= r_out * (1.0 + opt.boundary_slack);
      for (std::size_t k = 0; k < angles; ++k) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(angles);
        const cplx lambda = std::polar(r, th);
        SpectralCertificate cert = d == 1 ? annulus_certificate(lambda, *sctx, opt) : vector_annulus_certificate(lambda, *vctx, opt);
        double rp = cert.primary ? cert.primary->residual : NAN, rc = cert.companion ? cert.companion->residual : NAN;
        if (expect_inside) {
          ++inside_expected;
          if (cert.kind == CertificateKind::inside) ++inside_ok;
          worst_inside = std::max({worst_inside, cert.primary ? rp : INFINITY, cert.companion ? rc : INFINITY});
        } else {
          ++outside_expected;
          if (cert.kind == CertificateKind::outside) {
            ++outside_ok;
            best_floor = std::min(best_floor, cert.residual_floor);
          } else {
            best_floor = 0.0;
          }
        }
        tab.add({io::num(r), io::num(th), io::num(lambda.real()), io::num(lambda.imag()), to_string(cert.kind),
                 expect_inside ? "inside" : "outside", io::num(rp), io::num(rc), io::num(cert.residual_floor), cert.neumann_operator});
        for (const auto* side : {&cert.primary, &cert.companion})
          if (*side)
            for (auto& s : (*side)->ladder)
              ladder.add({io::num(r), io::num(th), (*side)->op, io::num(s.window), io::num(s.residual), io::num(s.plateau_residual)});
      }
    }
    const std::string dim = d == 1 ? "L^2_omega" : "L^2_omega(R+, C^" + std::to_string(d) + ")";
    if (inside_expected) {
      out.verdicts.push_back(at_most("inside_certificates", "every lambda in the annulus has quasi-eigenvectors for S and S_-1 on " + dim,
                                     worst_inside, opt.inside_tol,
                                     std::to_string(inside_ok) + " of " + std::to_string(inside_expected) + " certified inside"));
      out.verdicts.back().pass = out.verdicts.back().pass && inside_ok == inside_expected;
    }
    if (outside_expected) {
      out.verdicts.push_back(at_most("outside_certificates", "every lambda off the annulus has a convergent Neumann series on " + dim,
                                     static_cast<double>(outside_expected - outside_ok), 0.0,
                                     std::to_string(outside_ok) + " of " + std::to_string(outside_expected) + " certified outside"));
    }
    if (inside_expected && outside_expected) {
      double ratio = worst_inside > 0.0 ? best_floor / worst_inside : INFINITY;
      out.verdicts.push_back(at_least("separation", "smallest outside residual floor over largest inside residual", ratio, sep,
                                      "floor " + io::num(best_floor) + ", inside " + io::num(worst_inside)));
    }
    Table radii_t{"radii", {"rho_forward", "rho_backward", "inner_radius", "outer_radius", "d"}, {}};
    radii_t.add(detail::row({base.rho_forward, base.rho_backward, r_in, r_out, static_cast<double>(d)}));
    out.tables = {radii_t, tab};
    out.plotdata = {ladder};
    return out;
  };
}

// ---------------------------------------------------------------- cutoff

inline Runner prepare_cutoff(const Config& c) {
  const std::string P = "/params";
  io::reject_unknown(c.params, P, {"requests"});
  check_tolerance_names(c, {"l1_slack", "value_at_t0"});
  std::vector<CutoffRequest> reqs{{0.1, 5.0, 1.0, 2.0}, {0.01, 10.0, 0.5, 1.0}};
  if (c.params.contains("requests")) {
    const json& r = c.params["requests"];
    const std::string rp = io::child(P, "requests");
    if (!r.is_array() || r.empty()) throw ConfigError(rp, "expected a non-empty array of requests");
    reqs.clear();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string ip = io::child(rp, i);
      io::reject_unknown(r[i], ip, {"eps", "c0", "eta0", "delta"});
      CutoffRequest q;
      q.eps = io::number(r[i], "eps", ip, std::nullopt, {0.0, 1.0, true});
      q.c0 = io::number(r[i], "c0", ip, std::nullopt, io::Range::positive());
      q.eta0 = io::number(r[i], "eta0", ip, std::nullopt);
      q.delta = io::number(r[i], "delta", ip, std::nullopt, io::Range::positive());
      reqs.push_back(q);
    }
  }
  const double slack = tolerance(c, "l1_slack", 1e-6);
  const double vtol = tolerance(c, "value_at_t0", 1e-9);

  return [=]() {
    Outcome out;
    Table tab{"cutoff", {"eps", "c0", "eta0", "delta", "a", "t0", "tail_outside", "tail_limit", "total_l1", "l1_limit", "value_at_t0"}, {}};
    for (std::size_t i = 0; i < reqs.size(); ++i) {
      const CutoffRequest& q = reqs[i];
      const std::string tag = "request" + std::to_string(i) + ".";
      CutoffResult r;
      try {
        r = build_cutoff(q);
      } catch (const Error& e) {
        out.verdicts.push_back({tag + "construction", "a cut-off meeting the three bounds exists on the allowed span", INFINITY, "<=", 0.0,
                                false, e.what()});
        continue;
      }
      const double l1_limit = 2.0 * std::sqrt(2.0 * std::numbers::pi) + slack;
      out.verdicts.push_back(at_most(tag + "tail_outside", "int_{R \\ V} |f^| <= eps / C0 (unitary transform)", r.tail_outside, q.eps / q.c0));
      out.verdicts.push_back(at_most(tag + "total_l1", "int_R |f^| <= 2 sqrt(2 pi)", r.total_l1, l1_limit));
      out.verdicts.push_back(at_most(tag + "value_at_t0", "| |f(t0)| - 1 |", std::abs(r.value_at_t0 - 1.0), vtol,
                                     "|f(t0)| = " + io::num(r.value_at_t0)));
      tab.add(detail::row({q.eps, q.c0, q.eta0, q.delta, r.a, r.t0, r.tail_outside, q.eps / q.c0, r.total_l1, l1_limit, r.value_at_t0}));
      Table f{"cutoff_" + std::to_string(i), {"x", "re", "im"}, {}};
      const std::size_t stride = std::max<std::size_t>(1, r.f.size() / 2000);
      for (std::size_t k = 0; k < r.f.size(); k += stride) f.add(detail::row({r.f.x(k), r.f.values[k].real(), r.f.values[k].imag()}));
      out.plotdata.push_back(f);
    }
    out.tables = {tab};
    return out;
  };
}

// ---------------------------------------------------------------- inclusion

inline Runner prepare_inclusion(const Config& c) {
  const std::string P = "/params";
  io::reject_unknown(c.params, P, {"alphas", "plateaus", "start"});
  check_tolerance_names(c, {"residual"});
  require_space(c);
  if (c.orlicz) throw ConfigError("/space/orlicz", "the inclusion experiment needs an L^p space");
  const OperatorConfig op = require_operator(c);
  InclusionOptions opt;
  opt.step = c.step;
  opt.p = c.p;
  opt.plateaus = io::numbers(c.params, "plateaus", P, opt.plateaus, io::Range::positive());
  opt.start = io::number(c.params, "start", P, 0.0, io::Range::at_least(0.0));
  std::vector<cplx> alphas{0.0, cplx(0.5, 0.0)};
  if (c.params.contains("alphas")) {
    const json& a = c.params["alphas"];
    const std::string ap = io::child(P, "alphas");
    if (!a.is_array() || a.empty()) throw ConfigError(ap, "expected a non-empty array");
    alphas.clear();
    for (std::size_t i = 0; i < a.size(); ++i) alphas.push_back(detail::parse_complex(a[i], io::child(ap, i)));
  }
  const double tol = tolerance(c, "residual", 2e-2);

  return [=]() {
    Outcome out;
    StripSpec strip = strip_for_weight(c.weight, c.p, 2);
    double off = 0.0;
    for (cplx a : alphas) off = std::max({off, strip.a_min - a.imag(), a.imag() - strip.a_max});
    out.verdicts.push_back(at_most("alphas_in_strip", "every alpha lies in U_E", off, 1e-9,
                                   "I_E = [" + io::num(strip.a_min) + ", " + io::num(strip.a_max) + "]"));
    InclusionReport rep = symbol_spectrum_inclusion(op.kernel_at(c.step), c.weight, alphas, opt);
    Table tab{"inclusion", {"alpha_re", "alpha_im", "mu_re", "mu_im", "plateau", "residual"}, {}};
    double worst_trend = 0.0;
    for (auto& pt : rep.points) {
      for (std::size_t i = 0; i < pt.plateau.size(); ++i)
        tab.add(detail::row({pt.alpha.real(), pt.alpha.imag(), pt.mu.real(), pt.mu.imag(), pt.plateau[i], pt.residual[i]}));
      worst_trend = std::max(worst_trend, pt.trend);
    }
    out.verdicts.push_back(at_most("inclusion", "||T f - phi^(alpha) f|| / ||f|| on the widest plateau", rep.worst_final, tol,
                                   std::to_string(rep.points.size()) + " alphas"));
    out.verdicts.push_back(at_most("inclusion_trend", "residual shrinks as the plateau widens (last / first)", worst_trend, 1.0));
    out.tables = {tab};
    return out;
  };
}

// ---------------------------------------------------------------- vector-symbol

inline MatrixKernel parse_matrix_kernel(const json& j, const std::string& ptr, std::size_t d, double h, const Config& c,
                                        const std::optional<OperatorConfig>& op) {
  std::string kind = io::string(j, "kind", ptr, std::nullopt, {"random_gaussian", "identity", "entries"});
  if (kind == "random_gaussian") {
    io::reject_unknown(j, ptr, {"kind", "seed"});
    auto seed = static_cast<std::uint64_t>(io::integer(j, "seed", ptr, static_cast<long long>(c.seed), 0,
                                                       std::numeric_limits<long long>::max()));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> nd;
    std::vector<SampledFunction> e;
    for (std::size_t i = 0; i < d * d; ++i) {
      cplx amp(nd(rng), nd(rng));
      double center = -1.0 + 2.0 * u(rng), width = 0.5 + u(rng);
      SampledFunction g = kernels::gaussian(h, center, width, 1.0, 9.0);
      for (auto& v : g.values) v *= amp;
      e.push_back(std::move(g));
    }
    double lo = INFINITY, hi = -INFINITY;
    for (auto& s : e) {
      lo = std::min(lo, s.grid.origin);
      hi = std::max(hi, s.grid.end());
    }
    Grid common = Grid::aligned(lo, hi, h);
    for (auto& s : e) s = s.resampled_onto(common);
    return MatrixKernel(d, std::move(e));
  }
  if (kind == "identity") {
    io::reject_unknown(j, ptr, {"kind"});
    if (!op || op->kind != "kernel") throw ConfigError("/operator", "matrix_kernel identity needs a scalar kernel operator");
    return MatrixKernel::identity(op->kernel(h), d);
  }
  io::reject_unknown(j, ptr, {"kind", "entries"});
  const json& e = io::require(j, "entries", ptr);
  const std::string ep = io::child(ptr, "entries");
  if (!e.is_array() || e.size() != d) throw ConfigError(ep, "expected " + std::to_string(d) + " rows");
  std::vector<std::optional<SampledFunction>> parsed;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t r = 0; r < d; ++r) {
    if (!e[r].is_array() || e[r].size() != d) throw ConfigError(io::child(ep, r), "expected " + std::to_string(d) + " entries");
    for (std::size_t k = 0; k < d; ++k) {
      if (e[r][k].is_null()) {
        parsed.emplace_back();
        continue;
      }
      SampledFunction s = io::parse_kernel(e[r][k], io::child(io::child(ep, r), k), h, c.base_dir);
      lo = std::min(lo, s.grid.origin);
      hi = std::max(hi, s.grid.end());
      parsed.emplace_back(std::move(s));
    }
  }
  if (!std::isfinite(lo)) throw ConfigError(ep, "all entries are null");
  Grid common = Grid::aligned(lo, hi, h);
  std::vector<SampledFunction> out;
  for (auto& s : parsed) out.push_back(s ? s->resampled_onto(common) : SampledFunction(common));
  return MatrixKernel(d, std::move(out));
}

inline Runner prepare_vector_symbol(const Config& c) {
  const std::string P = "/params";
  io::reject_unknown(c.params, P,
                     {"d", "matrix_kernel", "vector_operator", "shift", "operator_weight", "random_pairs", "probes", "levels", "xi_max"});
  check_tolerance_names(c, {"representation", "scalarization", "shift_symbol"});
  require_space(c);
  if (c.orlicz) throw ConfigError("/space/orlicz", "operator-weighted spaces are L^p spaces");
  const auto d = static_cast<std::size_t>(io::integer(c.params, "d", P, 3, 1, 8));
  const std::string vop = io::string(c.params, "vector_operator", P, "kernel", {"kernel", "shift"});
  const double a_shift = io::number(c.params, "shift", P, 1.0, io::Range::at_least(0.0));
  std::optional<MatrixKernel> mk;
  if (vop == "kernel") {
    json mj = c.params.contains("matrix_kernel") ? c.params["matrix_kernel"] : json{{"kind", "random_gaussian"}};
    mk = parse_matrix_kernel(mj, io::child(P, "matrix_kernel"), d, c.step, c, c.op);
  } else if (c.params.contains("matrix_kernel")) {
    throw ConfigError(io::child(P, "matrix_kernel"), "matrix_kernel is only used with vector_operator = kernel");
  }
  json wj = c.params.contains("operator_weight") ? c.params["operator_weight"] : json{{"kind", "scalar"}};
  OperatorWeight W = io::parse_operator_weight(wj, io::child(P, "operator_weight"), c.weight, d);
  PipelineOptions opt;
  opt.n_levels = static_cast<std::size_t>(io::integer(c.params, "levels", P, 21, 1, 201));
  opt.random_pairs = static_cast<std::size_t>(io::integer(c.params, "random_pairs", P, 20, 0, 200));
  opt.probes = static_cast<std::size_t>(io::integer(c.params, "probes", P, 3, 1, 50));
  opt.probe_grid = c.grid();
  opt.seed = c.seed;
  opt.representation_tol = tolerance(c, "representation", 1e-5);
  opt.scalarization_tol = tolerance(c, "scalarization", 1e-8);
  const double tol_shift = tolerance(c, "shift_symbol", 1e-6);
  const double xi_max = io::number(c.params, "xi_max", P, 20.0, io::Range::positive());

  return [=]() {
    Outcome out;
    VectorOperator t = vop == "kernel" ? VectorOperator::kernel(*mk) : VectorOperator::shift_by(a_shift, d);
    PipelineReport rep;
    try {
      rep = operator_weight_pipeline(t, W, c.p, opt);
    } catch (const WeightError& e) {
      out.verdicts.push_back({"admissibility", "x -> ||W(x)|| is an admissible weight", INFINITY, "<=", 0.0, false, e.what()});
      return out;
    }
    out.verdicts.push_back({"admissibility", "x -> ||W(x)|| is an admissible weight", 0.0, "<=", 0.0, true, W.name()});
    out.verdicts.push_back(at_most("representation", "(T F)_a = P+ F^-1(V_a (F)_a^) on every checked level", rep.max_representation,
                                   opt.representation_tol));
    out.verdicts.push_back(at_most("scalarization", "<V_a(xi) u, v> equals the symbol of T_{u,v} (basis and random pairs)",
                                   rep.max_scalarization, opt.scalarization_tol,
                                   std::to_string(d * d) + " basis pairs, " + std::to_string(opt.random_pairs) + " random pairs"));
    if (vop == "shift") {
      double worst = 0.0;
      for (auto& L : rep.levels) {
        const double a = L.symbol.a;
        for (std::size_t k = 0; k < L.symbol.size(); ++k) {
          const cplx ref = std::exp(cplx(a, -L.symbol.xi(k) * a_shift));
          Eigen::MatrixXcd diff = L.symbol.V[k] - ref * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
          worst = std::max(worst, diff.cwiseAbs().maxCoeff() / std::exp(a * a_shift));
        }
      }
      out.verdicts.push_back(at_most("shift_symbol", "V_a(xi) = e^{(a - i xi) s} I for the vector shift by s", worst, tol_shift));
    }
    if (!rep.notice.empty()) out.notes.push_back(rep.notice);

    Table st{"strip", {"a_min", "a_max", "rho_forward", "rho_backward"}, {}};
    st.add(detail::row({rep.strip.a_min, rep.strip.a_max, rep.strip.rho_forward, rep.strip.rho_backward}));
    Table lv{"levels", {"a", "representation", "transform_pairing_defect", "scalarization", "sup_norm"}, {}};
    json symbols = json::array();
    Table plot{"vector_symbol", {"a", "xi", "j", "k", "re", "im"}, {}};
    for (auto& L : rep.levels) {
      lv.add(detail::row({L.symbol.a, L.representation, L.transform_pairing_defect, L.scalarization, L.symbol.sup_norm()}));
      json level{{"a", L.symbol.a}, {"xi", json::array()}, {"re", json::array()}, {"im", json::array()}};
      for (auto k : detail::plot_nodes(L.symbol.freq_grid, xi_max, 81)) {
        level["xi"].push_back(L.symbol.xi(k));
        json re = json::array(), im = json::array();
        for (Eigen::Index r = 0; r < L.symbol.V[k].rows(); ++r) {
          json rr = json::array(), ri = json::array();
          for (Eigen::Index q = 0; q < L.symbol.V[k].cols(); ++q) {
            rr.push_back(L.symbol.V[k](r, q).real());
            ri.push_back(L.symbol.V[k](r, q).imag());
            plot.add(detail::row({L.symbol.a, L.symbol.xi(k), static_cast<double>(r), static_cast<double>(q), L.symbol.V[k](r, q).real(),
                                  L.symbol.V[k](r, q).imag()}));
          }
          re.push_back(rr);
          im.push_back(ri);
        }
        level["re"].push_back(re);
        level["im"].push_back(im);
      }
      symbols.push_back(level);
    }
    out.tables = {st, lv};
    Table admiss{"admissibility", {"offset", "log_up", "log_down"}, {}};
    for (auto& r : rep.admissibility.rows) admiss.add(detail::row({r.offset, r.log_up, r.log_down}));
    out.tables.push_back(admiss);
    if (!rep.components.empty()) {
      Table comp{"component_strips", {"index", "a_min", "a_max"}, {}};
      for (auto& s : rep.components) comp.add(detail::row({static_cast<double>(s.index), s.a_min, s.a_max}));
      out.tables.push_back(comp);
      if (rep.component_intersection)
        out.notes.push_back("component strips intersect in [" + io::num(rep.component_intersection->first) + ", " +
                            io::num(rep.component_intersection->second) + "]");
    }
    out.plotdata = {plot};
    out.extra_files.emplace_back("plotdata/vector_symbol.json", symbols.dump(1) + "\n");
    return out;
  };
}

// ---------------------------------------------------------------- weights-report

inline Runner prepare_weights_report(const Config& c) {
  const std::string P = "/params";
  io::reject_unknown(c.params, P, {"offsets", "admissibility_span", "n_max", "d", "orlicz_samples"});
  check_tolerance_names(c, {"vector_radius", "orlicz"});
  require_space(c);
  const std::vector<double> offsets = io::numbers(c.params, "offsets", P, std::vector<double>{0.5, 1.0, 2.0, 4.0}, io::Range::positive());
  const double aspan = io::number(c.params, "admissibility_span", P, 64.0, io::Range::positive());
  for (std::size_t i = 0; i < offsets.size(); ++i)
    if (offsets[i] >= aspan) throw ConfigError(io::child(io::child(P, "offsets"), i), "offset exceeds the admissibility span");
  const int n_max = static_cast<int>(io::integer(c.params, "n_max", P, 64, 1, 4096));
  std::optional<std::size_t> d;
  if (c.params.contains("d")) d = static_cast<std::size_t>(io::integer(c.params, "d", P, std::nullopt, 1, 64));
  const auto samples = static_cast<std::size_t>(io::integer(c.params, "orlicz_samples", P, 50, 1, 1000));
  const double tol_vr = tolerance(c, "vector_radius", 1e-6);
  const double tol_or = tolerance(c, "orlicz", 1e-8);

  return [=]() {
    Outcome out;
    const double p = c.orlicz ? 2.0 : c.p;
    AdmissibilityReport adm = check_admissibility(c.weight, offsets, Grid(0.0, 1.0 / 64.0, static_cast<std::size_t>(std::llround(aspan * 64.0)) + 1));
    out.verdicts.push_back({"admissibility", "translation ratios of the weight stay bounded", 0.0, "<=", 0.0, adm.pass,
                            adm.pass ? c.weight.describe() : adm.diagnostic});
    out.verdicts.back().measured = adm.pass ? 0.0 : 1.0;
    Table at{"admissibility", {"offset", "log_up", "log_down", "log_up_half", "log_down_half"}, {}};
    for (auto& r : adm.rows) at.add(detail::row({r.offset, r.log_up, r.log_down, r.log_up_half, r.log_down_half}));

    SpectralRadiusOptions ro;
    ro.n_max = n_max;
    SpectralRadiusResult f = spectral_radius(c.weight, p, Direction::forward, ro);
    SpectralRadiusResult b = spectral_radius(c.weight, p, Direction::backward, ro);
    Table rt{"spectral_radius", {"n", "log_rate_forward", "log_rate_backward", "norm_S_n", "norm_S_-n"}, {}};
    for (std::size_t i = 0; i < f.n.size(); ++i)
      rt.add(detail::row({static_cast<double>(f.n[i]), f.log_rate[i], b.log_rate[i], std::exp(f.log_rate[i] * f.n[i]),
                          std::exp(b.log_rate[i] * b.n[i])}));
    const double lo = -b.log_estimate, hi = f.log_estimate;
    out.verdicts.push_back(at_least("strip_nonempty", "ln rho(S) + ln rho(S_-1) >= 0", hi - lo, -kDegenerateWidth,
                                    "I_E = [" + io::num(lo) + ", " + io::num(hi) + "]"));
    Table st{"strip", {"rho_forward", "rho_backward", "a_min", "a_max"}, {}};
    st.add(detail::row({f.estimate, b.estimate, lo, hi}));
    out.tables = {at, rt, st};

    if (d) {
      VectorRadiusReport vr = vector_spectral_radius(c.weight, *d, p, ro, tol_vr, c.seed);
      out.verdicts.push_back(at_most("vector_radius", "rho of the C^d-valued shifts equals the scalar rho (relative)", vr.max_rel_diff, tol_vr,
                                     "d = " + std::to_string(*d)));
      Table vt{"vector_radius", {"d", "forward", "backward", "scalar_forward", "scalar_backward"}, {}};
      vt.add(detail::row({static_cast<double>(*d), vr.forward, vr.backward, vr.scalar_forward, vr.scalar_backward}));
      out.tables.push_back(vt);
    }

    if (c.orlicz) {
      OrliczCheck oc = check_orlicz(*c.orlicz);
      out.verdicts.push_back({"orlicz_function", "A(0) = 0 and A(y)/y non-decreasing", oc.pass ? 0.0 : 1.0, "<=", 0.0, oc.pass,
                              oc.pass ? c.orlicz->name : oc.diagnostic});
      if (c.orlicz->name == "orlicz:power" && oc.pass) {
        std::mt19937_64 rng(c.seed);
        Grid g(0.0, 0.05, 801);
        // the weighted modular integrates A(|f|/t) omega, so y^p matches L^p with omega^{1/p}
        const double q = c.orlicz->p;
        const Weight w = c.weight;
        const Weight root = Weight::custom("omega^(1/p)", [w, q](double x) { return w.log_value(x) / q; });
        double worst = 0.0;
        for (std::size_t i = 0; i < samples; ++i) {
          SampledFunction s = whlab::detail::random_probe(g, 0.5, 39.5, rng);
          double lux = luxemburg_norm(s, *c.orlicz, c.weight), lp = lp_norm(s, q, root);
          worst = std::max(worst, std::abs(lux - lp) / lp);
        }
        out.verdicts.push_back(at_most("orlicz_consistency", "Luxemburg norm of y^p equals the L^p norm (relative)", worst, tol_or,
                                       std::to_string(samples) + " random functions"));
      }
    }

    Table prof{"weight_profile", {"x", "log_omega"}, {}};
    for (double x = 0.0; x <= aspan + 1e-12; x += aspan / 1024.0) prof.add(detail::row({x, c.weight.log_value(x)}));
    out.plotdata = {prof};
    return out;
  };
}

// ---------------------------------------------------------------- dispatch and report

inline Runner prepare(const Config& c) {
  if (c.experiment == "symbol") return prepare_symbol(c);
  if (c.experiment == "annulus") return prepare_annulus(c);
  if (c.experiment == "cutoff") return prepare_cutoff(c);
  if (c.experiment == "inclusion") return prepare_inclusion(c);
  if (c.experiment == "vector-symbol") return prepare_vector_symbol(c);
  return prepare_weights_report(c);
}

// Numeric failures become a failed "execution" verdict.
inline Outcome execute(const Runner& run) {
  try {
    return run();
  } catch (const Error& e) {
    Outcome o;
    o.verdicts.push_back({"execution", "the experiment ran to completion", INFINITY, "<=", 0.0, false, e.what()});
    return o;
  }
}

inline json verdict_json(const Verdict& v) {
  json j{{"name", v.name}, {"invariant", v.invariant}, {"relation", v.relation}, {"threshold", v.threshold}, {"pass", v.pass}};
  j["measured"] = std::isfinite(v.measured) ? json(v.measured) : json(io::num(v.measured));
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

inline json build_report(const Config& c, const Outcome& o) {
  json r;
  r["format"] = kReportFormat;
  r["experiment"] = c.experiment;
  json versions;
  versions["whlab"] = kVersion;
  versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  versions["fftw"] = std::string(fftw_version);
  r["metadata"]["config_hash"] = "fnv1a64:" + c.hash();
  r["metadata"]["seed"] = c.seed;
  r["metadata"]["versions"] = versions;
  r["config"] = c.effective;
  r["verdicts"] = json::array();
  for (auto& v : o.verdicts) r["verdicts"].push_back(verdict_json(v));
  r["tables"] = json::array();
  for (auto& t : o.tables) r["tables"].push_back({{"name", t.name}, {"file", "tables/" + t.name + ".csv"}, {"csv", t.csv()}});
  r["plotdata"] = json::array();
  for (auto& t : o.plotdata) r["plotdata"].push_back({{"name", t.name}, {"file", "plotdata/" + t.name + ".csv"}});
  for (auto& [path, text] : o.extra_files) r["plotdata"].push_back({{"name", std::filesystem::path(path).stem().string()}, {"file", path}});
  r["notes"] = o.notes;
  r["pass"] = o.pass();
  return r;
}

// Writes report.json, tables/*.csv and plotdata/*; returns the report.
inline json write_outputs(const std::filesystem::path& dir, const Config& c, const Outcome& o) {
  json report = build_report(c, o);
  io::write_text(dir / "report.json", report.dump(2) + "\n");
  for (auto& t : o.tables) io::write_text(dir / "tables" / (t.name + ".csv"), t.csv());
  for (auto& t : o.plotdata) io::write_text(dir / "plotdata" / (t.name + ".csv"), t.csv());
  for (auto& [path, text] : o.extra_files) io::write_text(dir / path, text);
  return report;
}

}  // namespace whlab::experiments
