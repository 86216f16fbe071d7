#include <gtest/gtest.h>

#include <whlab/kernels.hpp>
#include <whlab/symbol.hpp>

#include "oracles.hpp"

using namespace whlab;
using oracle::cplx;

namespace {

SampledFunction probe(const Grid& g, double c, double r, cplx amp, double kappa) {
  return SampledFunction::sample(g, [=](double x) { return amp * oracle::bump((x - c) / r) * std::polar(1.0, kappa * x); });
}

std::vector<SampledFunction> random_probes(const Grid& g, double lo, double hi, int count, std::uint64_t seed) {
  oracle::Rng rng(seed);
  std::vector<SampledFunction> out;
  for (int k = 0; k < count; ++k) {
    double r = rng.uniform(0.5, 3.0);
    out.push_back(probe(g, rng.uniform(lo + r, hi - r), r, rng.complex_normal(), rng.uniform(-4, 4)));
  }
  return out;
}

double max_err_vs_strip_eval(const FrequencyFunction& nu, const SampledFunction& phi, double a, double xi_max = 1e300) {
  double worst = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    if (std::abs(nu.xi(k)) > xi_max) continue;
    worst = std::max(worst, std::abs(nu.values[k] - strip_eval(phi, cplx(nu.xi(k), a))));
  }
  return worst;
}

}  // namespace

TEST(SymbolOfKernel, ShiftClosedForm) {
  const double h = 0.01;
  for (double a : {-1.0, 0.0, 0.7, 1.0}) {
    FrequencyFunction nu = symbol_of_kernel(shift_kernel(1.0, h), a, 512);
    for (std::size_t k = 0; k < nu.size(); ++k)
      EXPECT_LE(std::abs(nu.values[k] - std::exp(cplx(a, -nu.xi(k)))), 1e-12 * std::exp(a));
  }
}

TEST(SymbolOfKernel, MollifiedDeltaApproximatesShiftSymbol) {
  const double h = 1e-4;
  FrequencyFunction nu = symbol_of_kernel(kernels::mollified_delta(h, 1.0, 1e-3), 0.0, 4096);
  double worst = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k)
    if (std::abs(nu.xi(k)) <= 20.0) worst = std::max(worst, std::abs(nu.values[k] - std::polar(1.0, -nu.xi(k))));
  EXPECT_LE(worst, 1e-3);
}

TEST(SymbolOfKernel, GaussianMatchesStripEval) {
  const double h = 0.02;
  SampledFunction phi = kernels::gaussian(h, 0.3, 0.8);
  FrequencyFunction nu = symbol_of_kernel(phi, 0.5, 2048);
  EXPECT_LE(max_err_vs_strip_eval(nu, phi, 0.5), 1e-7);
  // closed form of the continuous transform at low frequency
  for (std::size_t k = 0; k < nu.size(); ++k) {
    if (std::abs(nu.xi(k)) > 5.0) continue;
    cplx ref = oracle::gaussian_hat(cplx(nu.xi(k), 0.5), 0.3, 0.8, 1.0);
    EXPECT_LE(std::abs(nu.values[k] - ref), 1e-7);
  }
}

TEST(SymbolOfKernel, TwoPathIdentityOnRandomKernels) {
  oracle::Rng rng(41);
  const double h = 0.05;
  for (int t = 0; t < 12; ++t) {
    double a = rng.uniform(-1.0, 1.0);
    SampledFunction phi = t % 2 == 0 ? kernels::gaussian(h, rng.uniform(-1, 1), rng.uniform(0.3, 1.5), rng.uniform(0.5, 2))
                                     : kernels::bump(h, rng.uniform(-1, 1), rng.uniform(0.3, 2.0), rng.uniform(0.5, 2));
    FrequencyFunction nu = symbol_of_kernel(phi, a, phi.size() * 3);
    EXPECT_LE(max_err_vs_strip_eval(nu, phi, a), 1e-7 * std::max(1.0, nu.max_abs()));
  }
}

TEST(SymbolOfKernel, HermitianSymmetryForRealEvenKernel) {
  SampledFunction phi = kernels::gaussian(0.05, 0.0, 1.0);
  FrequencyFunction nu = symbol_of_kernel(phi, 0.0, 1000);
  const std::size_t n = nu.size();
  for (std::size_t k = 1; k < n; ++k) {
    ASSERT_NEAR(nu.xi(k), -nu.xi(n - k), 1e-9);
    EXPECT_LE(std::abs(nu.values[n - k] - std::conj(nu.values[k])), 1e-10);
  }
}

TEST(SymbolOfKernel, LevelOutsideStripRejected) {
  StripSpec s = strip_for_weight(Weight::exponential(1.0), 2.0);
  EXPECT_THROW(symbol_of_kernel(kernels::gaussian(0.05), 0.0, 0, &s), StripError);
  EXPECT_NO_THROW(symbol_of_kernel(kernels::gaussian(0.05), 1.0, 0, &s));
}

TEST(Strip, FromWeights) {
  StripSpec c = strip_for_weight(Weight::constant(), 2.0);
  EXPECT_TRUE(c.degenerate());
  EXPECT_EQ(c.levels, std::vector<double>{0.0});
  StripSpec e = strip_for_weight(Weight::exponential(1.0), 2.0);
  EXPECT_TRUE(e.degenerate());
  EXPECT_NEAR(e.a_min, 1.0, 1e-12);
  StripSpec z = strip_for_weight(Weight::dyadic_zigzag(1.0), 2.0, 21);
  EXPECT_FALSE(z.degenerate());
  EXPECT_NEAR(z.a_min, -1.0, 1e-9);
  EXPECT_NEAR(z.a_max, 1.0, 1e-9);
  ASSERT_EQ(z.levels.size(), 21u);
  EXPECT_TRUE(std::is_sorted(z.levels.begin(), z.levels.end()));
  EXPECT_EQ(z.levels.front(), z.a_min);
  EXPECT_EQ(z.levels.back(), z.a_max);
}

TEST(Representation, ShiftIdentityAndCorruptedControl) {
  const double h = 0.01;
  Grid g(0.0, h, 2001);
  auto probes = random_probes(g, 0.5, 19.5, 5, 51);
  const std::size_t count = g.count + 400;
  for (double a : {-1.0, 0.0, 1.0}) {
    FrequencyFunction nu = symbol_of_kernel(shift_kernel(1.0, h), a, count);
    auto rep = verify_representation(WienerHopfOperator::shift_by(1.0), nu, a, probes);
    EXPECT_LE(rep.max_residual, 1e-6);
    EXPECT_TRUE(rep.pass);

    FrequencyFunction bad = nu;
    for (auto& v : bad.values) v += 0.1;
    auto r2 = verify_representation(WienerHopfOperator::shift_by(1.0), bad, a, probes);
    EXPECT_GT(r2.max_residual, 1e-2);
    EXPECT_FALSE(r2.pass);
  }
  FrequencyFunction one = constant_symbol(Grid(0.0, h, count).frequency_grid(), 0.0, 1.0);
  EXPECT_LE(verify_representation(WienerHopfOperator::identity(), one, 0.3, probes).max_residual, 1e-10);
}

TEST(Representation, KernelsAcrossStripLevels) {
  const double h = 0.01;
  Grid g(0.0, h, 2001);
  auto probes = random_probes(g, 0.5, 19.5, 5, 52);
  std::vector<SampledFunction> kernels{kernels::gaussian(h, 0.4, 0.7), kernels::bump(h, -0.3, 1.2, 2.0)};
  for (auto w : {Weight::constant(), Weight::exponential(1.0), Weight::dyadic_zigzag(1.0)}) {
    StripSpec s = strip_for_weight(w, 2.0, 5);
    for (const auto& phi : kernels) {
      auto t = WienerHopfOperator::kernel(phi, SpaceSpec::lp(2.0, w));
      for (double a : s.levels) {
        FrequencyFunction nu = symbol_of_kernel(phi, a, g.count + phi.size() + 16, &s);
        auto rep = verify_representation(t, nu, a, probes);
        EXPECT_LE(rep.max_residual, 1e-5) << w.describe() << " a=" << a;
      }
    }
  }
}

TEST(Representation, ProbeTouchingEndsRejected) {
  const double h = 0.01;
  Grid g(0.0, h, 1001);
  FrequencyFunction nu = symbol_of_kernel(shift_kernel(1.0, h), 0.0, 1500);
  SampledFunction edge = SampledFunction::sample(g, [](double x) { return cplx(std::exp(-x)); });
  EXPECT_THROW(verify_representation(WienerHopfOperator::shift_by(1.0), nu, 0.0, {edge}), ProbeError);
  SampledFunction right = probe(g, 9.5, 1.0, 1.0, 0.0);
  EXPECT_THROW(verify_representation(WienerHopfOperator::shift_by(1.0), nu, 0.0, {right}), ProbeError);
}

TEST(Representation, CompositionMultipliesSymbols) {
  const double h = 0.01;
  Grid g(0.0, h, 4001);
  SampledFunction phi = kernels::gaussian(h, 0.5, 0.6), psi = kernels::bump(h, -0.4, 1.0);
  auto tp = WienerHopfOperator::kernel(phi), ts = WienerHopfOperator::kernel(psi);
  const std::size_t count = g.count + 1000;
  SampledFunction f = probe(g, 20.0, 6.0, cplx(1.0, -0.4), 2.0);
  for (double a : {-0.5, 0.0, 0.5}) {
    FrequencyFunction np = symbol_of_kernel(phi, a, count), ns = symbol_of_kernel(psi, a, count);
    FrequencyFunction prod = np;
    for (std::size_t k = 0; k < count; ++k) prod.values[k] *= ns.values[k];
    SampledFunction lhs = twist(apply_wh(tp, apply_wh(ts, f, ConvolutionMethod::direct), ConvolutionMethod::direct), a);
    FrequencyFunction F = forward_transform(twist(f.padded_to(count), a));
    for (std::size_t k = 0; k < count; ++k) F.values[k] *= prod.values[k];
    SampledFunction rhs = inverse_transform(F).resampled_onto(g);
    EXPECT_LE(lp_norm(lhs - rhs, 2.0) / lp_norm(lhs, 2.0), 1e-4);
  }
}

TEST(ExtractSymbol, ShiftIdentityAndGaussian) {
  const double h = 0.002;
  ExtractOptions opt;
  opt.recover = RecoverOptions{Grid(0.0, h, 6000), -0.5, 2.0, 1, std::nullopt};
  opt.x0 = 4.0;
  opt.count = 4096;
  auto shift = WienerHopfOperator::as_black_box(WienerHopfOperator::shift_by(1.0));
  for (double a : {-0.5, 0.0, 0.5}) {
    ExtractedSymbol s = extract_symbol(shift, a, opt);
    EXPECT_GT(s.valid_count, 100u);
    EXPECT_LT(s.xi_lo, -100.0);
    EXPECT_GT(s.xi_hi, 100.0);
    for (std::size_t k = 0; k < s.symbol.size(); ++k)
      if (s.valid[k]) {
        EXPECT_LE(std::abs(s.symbol.values[k] - std::exp(cplx(a, -s.symbol.xi(k)))), 1e-3);
      }
  }
  ExtractOptions idopt = opt;
  idopt.recover = RecoverOptions{Grid(0.0, h, 3000), -0.2, 0.2, 1, std::nullopt};
  ExtractedSymbol id = extract_symbol(WienerHopfOperator::identity(), 0.3, idopt);
  for (std::size_t k = 0; k < id.symbol.size(); ++k)
    if (id.valid[k]) {
      EXPECT_LE(std::abs(id.symbol.values[k] - 1.0), 1e-3);
    }

  SampledFunction phi = kernels::gaussian(h, 0.3, 0.5, 1.0, 6.0);
  ExtractOptions gopt = opt;
  gopt.recover = RecoverOptions{Grid(0.0, h, 4000), -3.0, 3.5, 1, std::nullopt};
  gopt.x0 = 3.5;
  auto bb = WienerHopfOperator::as_black_box(WienerHopfOperator::kernel(phi));
  for (double a : {-0.5, 0.5}) {
    ExtractedSymbol s = extract_symbol(bb, a, gopt);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.symbol.size(); ++k)
      if (s.valid[k]) worst = std::max(worst, std::abs(s.symbol.values[k] - strip_eval(phi, cplx(s.symbol.xi(k), a))));
    EXPECT_LE(worst, 1e-3);
  }
}

TEST(ExtractSymbol, EmptyWindowIsScaleError) {
  ExtractOptions opt;
  opt.recover = RecoverOptions{Grid(0.0, 0.002, 3000), -0.2, 0.2, 1, std::nullopt};
  opt.cutoff = 2.0;
  opt.x0 = 2.0;
  EXPECT_THROW(extract_symbol(WienerHopfOperator::identity(), 0.0, opt), ScaleError);
}

TEST(StripBound, TightOnUnweightedSpace) {
  const double h = 0.05;
  Grid g(0.0, h, 4001);
  for (auto phi : {kernels::gaussian(h, 0.4, 1.0), kernels::bump(h, 0.2, 1.5)}) {
    double nrm = operator_norm(WienerHopfOperator::kernel(phi), g).value;
    auto r = verify_strip_bound(phi, strip_for_weight(Weight::constant(), 2.0), nrm);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.ratio, 1.0, 1e-3);
    EXPECT_EQ(r.value.size(), 81u);
  }
}

TEST(StripBound, ZeroKernelAndViolation) {
  SampledFunction zero(Grid(-1.0, 0.05, 41));
  EXPECT_TRUE(verify_strip_bound(zero, StripSpec::uniform(-1, 1, 21), 0.0).pass);
  auto r = verify_strip_bound(kernels::gaussian(0.05), StripSpec::uniform(-1, 1, 21), 1.0);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.value.size(), 21u * 81u);
  EXPECT_NEAR(r.max_value, std::sqrt(2 * oracle::pi) * std::exp(0.5), 1e-6);
  EXPECT_NEAR(std::abs(r.argmax.imag()), 1.0, 1e-12);
}

TEST(StripBound, HoldsOnZigzagWeight) {
  const double h = 0.05;
  Grid g(0.0, h, 22001);
  SampledFunction phi = kernels::gaussian(h, 0.0, 1.0);
  auto w = Weight::dyadic_zigzag(1.0);
  auto n = operator_norm(WienerHopfOperator::kernel(phi, SpaceSpec::lp(2.0, w)), g);
  StripSpec s = strip_for_weight(w, 2.0, 21);
  auto r = verify_strip_bound(phi, s, n.value);
  EXPECT_TRUE(r.pass) << r.max_value << " vs " << n.value;
  EXPECT_TRUE(n.converged);
  EXPECT_NEAR(n.value, std::sqrt(2 * oracle::pi) * std::exp(0.5), 5e-3 * n.value);
  SymbolTable t = build_symbol_table(phi, s, 2048, "gaussian", n.value);
  for (double q : t.ratio) EXPECT_LE(q, 1.0 + 1e-3);
}

TEST(Analyticity, ZigzagGaussianTablePasses) {
  const double h = 0.05;
  SampledFunction phi = kernels::gaussian(h, 0.4, 1.0);
  StripSpec s = strip_for_weight(Weight::dyadic_zigzag(1.0), 2.0, 21);
  SymbolTable t = build_symbol_table(phi, s, 4096, "gaussian");
  auto r = verify_analyticity(t);
  EXPECT_FALSE(r.skipped);
  EXPECT_TRUE(r.consistency_checked);
  EXPECT_LE(r.consistency, 1e-6);
  EXPECT_LE(r.cr_residual, 1e-4);
  EXPECT_EQ(r.a_stencil, 7);
  EXPECT_TRUE(r.pass);
}

TEST(Analyticity, BumpKernelPasses) {
  const double h = 0.02;
  SampledFunction phi = kernels::bump(h, -0.2, 1.0);
  SymbolTable t = build_symbol_table(phi, StripSpec::uniform(-1, 1, 41), 4096, "bump");
  auto r = verify_analyticity(t);
  EXPECT_TRUE(r.pass) << r.consistency << " " << r.cr_residual;
}

TEST(Analyticity, DegenerateStripSkipped) {
  StripSpec s = strip_for_weight(Weight::exponential(1.0), 2.0);
  SymbolTable t = build_symbol_table(kernels::gaussian(0.05), s, 0, "gaussian");
  auto r = verify_analyticity(t);
  EXPECT_TRUE(r.skipped);
  EXPECT_NE(r.notice.find("degenerate"), std::string::npos);
}

TEST(Analyticity, ConjugatedTableFails) {
  SampledFunction phi = kernels::gaussian(0.05, 0.4, 1.0);
  SymbolTable t = build_symbol_table(phi, StripSpec::uniform(-1, 1, 21), 4096, "gaussian");
  t.kernel.reset();
  for (auto& nu : t.nu)
    for (auto& v : nu.values) v = std::conj(v);
  auto r = verify_analyticity(t);
  EXPECT_FALSE(r.consistency_checked);
  EXPECT_GT(r.cr_residual, 0.1);
  EXPECT_FALSE(r.pass);
}

TEST(Analyticity, NonUniformLevelsRejected) {
  SampledFunction phi = kernels::gaussian(0.05);
  StripSpec s = StripSpec::uniform(-1, 1, 5);
  s.levels[2] = 0.1;
  SymbolTable t = build_symbol_table(phi, s, 0, "gaussian");
  EXPECT_THROW(verify_analyticity(t), InvalidInput);
}
