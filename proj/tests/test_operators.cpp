#include <gtest/gtest.h>

#include <whlab/kernels.hpp>
#include <whlab/norms.hpp>
#include <whlab/recovery.hpp>

#include "oracles.hpp"

using namespace whlab;
using oracle::cplx;

namespace {

SampledFunction bump_on(const Grid& g, double c, double r, cplx amp = 1.0, double kappa = 0.0) {
  return SampledFunction::sample(g, [=](double x) { return amp * oracle::bump((x - c) / r) * std::polar(1.0, kappa * x); });
}

double max_diff(const SampledFunction& a, const SampledFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

std::vector<SampledFunction> random_probes(const Grid& g, double lo, double hi, int count, std::uint64_t seed) {
  oracle::Rng rng(seed);
  std::vector<SampledFunction> out;
  for (int k = 0; k < count; ++k) {
    double r = rng.uniform(0.5, 2.0);
    out.push_back(bump_on(g, rng.uniform(lo + r, hi - r), r, rng.complex_normal(), rng.uniform(-3, 3)));
  }
  return out;
}

}  // namespace

TEST(Shift, IdentityAndLeftInverse) {
  Grid g(0.0, 0.01, 2000);
  SampledFunction f = bump_on(g, 6.0, 3.0, cplx(1, 2), 1.5);
  EXPECT_EQ(max_diff(apply_shift(f, 0.0), f), 0.0);
  EXPECT_EQ(max_diff(apply_shift(apply_shift(f, 1.0), -1.0), f), 0.0);
  // S_1 S_{-1} loses whatever sat on [0, 1)
  SampledFunction near0 = bump_on(g, 0.6, 0.5);
  EXPECT_GT(max_diff(apply_shift(apply_shift(near0, -1.0), 1.0), near0), 0.1);
}

TEST(Shift, TruncationKillsLeftMass) {
  Grid g(0.0, 0.01, 500);
  SampledFunction f = bump_on(g, 0.25, 0.24);
  EXPECT_TRUE(apply_shift(f, -1.0).is_zero());
}

TEST(Shift, RejectsOffGridAmounts) {
  Grid g(0.0, 0.01, 500);
  EXPECT_THROW(apply_shift(SampledFunction(g), 0.013), AlignmentError);
}

TEST(Modulation, IsometryAndExponentialLaw) {
  oracle::Rng rng(21);
  Grid g(0.0, 0.01, 2000);
  SampledFunction f = bump_on(g, 8.0, 5.0, cplx(0.3, -1.0));
  EXPECT_EQ(max_diff(apply_modulation(f, 0.0), f), 0.0);
  std::vector<SpaceSpec> specs{SpaceSpec::lp(2.0, Weight::dyadic_zigzag(1.0)), SpaceSpec::lp(1.0, Weight::exponential(0.4)),
                               SpaceSpec::orlicz(OrliczFunction::ylog())};
  for (int t = 0; t < 10; ++t) {
    double a = rng.uniform(-10, 10), b = rng.uniform(-10, 10);
    for (auto& s : specs) EXPECT_NEAR(s.norm(apply_modulation(f, a)) / s.norm(f), 1.0, 1e-12);
    EXPECT_LE(max_diff(apply_modulation(apply_modulation(f, a), b), apply_modulation(f, a + b)), 1e-12);
  }
}

TEST(ApplyWH, MollifiedDeltaAtZeroIsIdentity) {
  const double h = 1e-3;
  Grid g(0.0, h, 12000);
  SampledFunction f = bump_on(g, 5.0, 2.0);
  auto t = WienerHopfOperator::kernel(kernels::mollified_delta(h, 0.0, 1e-2));
  EXPECT_LE(max_diff(apply_wh(t, f), f), 1e-3);
}

TEST(ApplyWH, MollifiedDeltaAtOneIsShift) {
  const double h = 1e-3;
  Grid g(0.0, h, 12000);
  SampledFunction f = bump_on(g, 5.0, 2.0);
  auto t = WienerHopfOperator::kernel(kernels::mollified_delta(h, 1.0, 1e-2));
  EXPECT_LE(max_diff(apply_wh(t, f), apply_shift(f, 1.0)), 1e-3);
}

TEST(ApplyWH, GaussianAgainstClosedFormTruncatedConvolution) {
  const double h = 0.01;
  Grid g(0.0, h, 3000);
  SampledFunction f = SampledFunction::sample(g, [](double x) { return cplx(std::exp(-0.5 * (x - 6) * (x - 6))); });
  auto t = WienerHopfOperator::kernel(kernels::gaussian(h, 0.0, 1.0, 1.0, 12.0));
  auto ref = [](double x) {
    return std::exp(-0.25 * (x - 6) * (x - 6)) * 0.5 * std::sqrt(oracle::pi) * std::erfc(-(x + 6) / 2.0);
  };
  for (auto method : {ConvolutionMethod::direct, ConvolutionMethod::fft}) {
    SampledFunction r = apply_wh(t, f, method);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.count; ++i) worst = std::max(worst, std::abs(r.values[i] - ref(g.at(i))));
    EXPECT_LE(worst, 1e-7);
  }
}

TEST(ApplyWH, NegativeSupportRejected) {
  Grid g(-1.0, 0.01, 500);
  SampledFunction f = bump_on(g, -0.5, 0.3);
  auto t = WienerHopfOperator::kernel(kernels::gaussian(0.01));
  EXPECT_THROW(apply_wh(t, f), SupportError);
}

TEST(FiniteSection, IdentityKernelGivesIdentity) {
  const double h = 0.05;
  Grid g(0.0, h, 400);
  auto t = WienerHopfOperator::kernel(kernels::mollified_delta(h, 0.0, h));
  FiniteSection s = finite_section(t, {2.0, 8.0}, {2.0, 8.0}, g);
  Eigen::MatrixXcd d = s.matrix - Eigen::MatrixXcd::Identity(s.matrix.rows(), s.matrix.cols());
  EXPECT_LE(d.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FiniteSection, ShiftStripes) {
  const double h = 0.1;
  Grid g(0.0, h, 400);
  for (auto [w, val] : {std::pair{Weight::constant(), 1.0}, std::pair{Weight::exponential(1.0), std::exp(1.0)}}) {
    auto t = WienerHopfOperator::shift_by(1.0, SpaceSpec::lp(2.0, w));
    FiniteSection s = finite_section(t, {0.0, 20.0}, {0.0, 20.0}, g);
    for (Eigen::Index i = 0; i < s.matrix.rows(); ++i)
      for (Eigen::Index j = 0; j < s.matrix.cols(); ++j) {
        cplx expect = (i - j == 10) ? cplx(val) : cplx(0.0);
        EXPECT_NEAR(std::abs(s.matrix(i, j) - expect), 0.0, 1e-12 * val);
      }
  }
}

TEST(FiniteSection, BlackBoxMatchesKernelPath) {
  const double h = 0.1;
  Grid g(0.0, h, 300);
  auto t = WienerHopfOperator::kernel(kernels::gaussian(h, 0.5, 0.7), SpaceSpec::lp(2.0, Weight::exponential(0.3)));
  FiniteSection a = finite_section(t, {3.0, 10.0}, {2.0, 12.0}, g);
  FiniteSection b = finite_section(WienerHopfOperator::as_black_box(t), {3.0, 10.0}, {2.0, 12.0}, g);
  EXPECT_LE((a.matrix - b.matrix).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FiniteSection, ToeplitzStructureForUnitWeight) {
  const double h = 0.1;
  Grid g(0.0, h, 300);
  auto t = WienerHopfOperator::kernel(kernels::gaussian(h, 0.3, 1.2));
  FiniteSection s = finite_section(t, {0.0, 15.0}, {0.0, 15.0}, g);
  for (Eigen::Index i = 1; i < s.matrix.rows(); ++i)
    for (Eigen::Index j = 1; j < s.matrix.cols(); ++j)
      EXPECT_LE(std::abs(s.matrix(i, j) - s.matrix(i - 1, j - 1)), 1e-9);
}

TEST(FiniteSection, EmptyWindowRejected) {
  Grid g(0.0, 0.1, 100);
  EXPECT_THROW(finite_section(WienerHopfOperator::shift_by(1.0), {3.0, 3.0}, {0.0, 5.0}, g), InvalidInput);
}

TEST(OperatorNorm, ModulationIsIsometry) {
  Grid g(0.0, 0.1, 400);
  for (double a : {0.0, 1.3, -7.0}) {
    auto t = WienerHopfOperator::black_box([a](const SampledFunction& f) { return apply_modulation(f, a); });
    EXPECT_NEAR(operator_norm(t, g).value, 1.0, 1e-6);
  }
}

TEST(OperatorNorm, ShiftMatchesTranslationNorm) {
  Grid g(0.0, 0.05, 2000);
  for (auto w : {Weight::constant(), Weight::exponential(0.5), Weight::power(2.0), Weight::dyadic_zigzag(1.0)}) {
    for (double n : {1.0, 2.0}) {
      auto t = WienerHopfOperator::shift_by(n, SpaceSpec::lp(2.0, w));
      double v = operator_norm(t, g).value;
      double ref = translation_norm(w, 2.0, n);
      EXPECT_NEAR(v / ref, 1.0, 1e-3) << w.describe();
    }
  }
}

TEST(OperatorNorm, GaussianKernelMatchesSymbolSup) {
  const double h = 0.05;
  Grid g(0.0, h, 4001);
  SampledFunction phi = kernels::gaussian(h, 0.4, 1.0);
  auto r = operator_norm(WienerHopfOperator::kernel(phi), g);
  FrequencyFunction F = forward_transform(phi.padded_to(4096));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value / F.max_abs(), 1.0, 1e-3);
}

TEST(OperatorNorm, RandomProbeLowerBoundForOtherSpaces) {
  Grid g(0.0, 0.05, 1000);
  auto t = WienerHopfOperator::shift_by(1.0, SpaceSpec::lp(1.0, Weight::exponential(0.5)));
  auto r = operator_norm(t, g);
  EXPECT_TRUE(r.lower_bound);
  EXPECT_LE(r.value, std::exp(0.5) * (1 + 1e-12));
  EXPECT_GT(r.value, std::exp(0.5) * 0.99);
}

TEST(OperatorNorm, BoundsSymbolOnStrip) {
  // ||T_phi|| on L^2_{e^{x}} is at least |phi^(xi + i)| for every xi
  const double h = 0.05;
  Grid g(0.0, h, 4001);
  SampledFunction phi = kernels::gaussian(h, 0.0, 1.0);
  auto t = WienerHopfOperator::kernel(phi, SpaceSpec::lp(2.0, Weight::exponential(1.0)));
  double nrm = operator_norm(t, g).value;
  double best = 0.0;
  for (double xi = -5; xi <= 5; xi += 0.25) best = std::max(best, std::abs(strip_eval(phi, cplx(xi, 1.0))));
  EXPECT_GE(nrm, best * (1 - 1e-3));
}

TEST(SpectralRadius, ClosedFormCases) {
  auto c = spectral_radius(Weight::constant(), 2.0, Direction::forward);
  EXPECT_EQ(c.estimate, 1.0);
  EXPECT_EQ(spectral_radius(Weight::constant(), 2.0, Direction::backward).estimate, 1.0);
  EXPECT_NEAR(spectral_radius(Weight::exponential(1.0), 2.0, Direction::forward).estimate, std::exp(1.0), 1e-12);
  EXPECT_NEAR(spectral_radius(Weight::exponential(1.0), 2.0, Direction::backward).estimate, std::exp(-1.0), 1e-12);
  auto zf = spectral_radius(Weight::dyadic_zigzag(1.0), 2.0, Direction::forward);
  auto zb = spectral_radius(Weight::dyadic_zigzag(1.0), 2.0, Direction::backward);
  EXPECT_NEAR(zf.estimate, std::exp(1.0), 1e-9);
  EXPECT_NEAR(zb.estimate, std::exp(1.0), 1e-9);
}

TEST(SpectralRadius, ProductAtLeastOne) {
  for (auto w : {Weight::power(3.0), Weight::power(-2.0), Weight::capped_exponential(2.0, 3.0), Weight::exponential(-0.3),
                 Weight::dyadic_zigzag(0.5)}) {
    double f = spectral_radius(w, 2.0, Direction::forward).estimate;
    double b = spectral_radius(w, 2.0, Direction::backward).estimate;
    EXPECT_GE(f * b, 1.0 - 1e-9) << w.describe();
    EXPECT_LE(f, spectral_radius(w, 2.0, Direction::forward).upper_bound + 1e-15);
  }
}

TEST(Commutation, KernelAndShiftOperatorsCommuteWithTranslations) {
  const double h = 0.01;
  Grid g(0.0, h, 4000);
  auto probes = random_probes(g, 1.0, 20.0, 6, 31);
  for (auto w : {Weight::constant(), Weight::exponential(1.0), Weight::dyadic_zigzag(1.0)}) {
    SpaceSpec sp = SpaceSpec::lp(2.0, w);
    EXPECT_LE(commutation_defect(WienerHopfOperator::kernel(kernels::gaussian(h, 0.5, 0.8), sp), probes), 1e-6) << w.describe();
    EXPECT_LE(commutation_defect(WienerHopfOperator::kernel(kernels::bump(h, -0.3, 0.6), sp), probes), 1e-6);
    EXPECT_LE(commutation_defect(WienerHopfOperator::shift_by(1.0, sp), probes), 1e-6);
  }
}

TEST(Commutation, MultiplicationOperatorFails) {
  Grid g(0.0, 0.01, 4000);
  auto probes = random_probes(g, 1.0, 20.0, 3, 32);
  auto t = WienerHopfOperator::black_box([](const SampledFunction& f) {
    return SampledFunction::sample(f.grid, [&](double x) { return x * f.values[f.grid.nearest(x)]; });
  });
  EXPECT_GT(commutation_defect(t, probes), 0.1);
}

TEST(RecoverKernel, ShiftGivesTranslatedMollifier) {
  const double h = 0.002;
  RecoverOptions opt{Grid(0.0, h, 6000), -0.5, 2.0, 1, std::nullopt};
  auto t = WienerHopfOperator::as_black_box(WienerHopfOperator::shift_by(1.0));
  auto r = recover_kernel(t, 100, 4.0, opt);
  SampledFunction theta = kernels::mollifier(h, 100);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.kernel.size(); ++i) {
    auto k = theta.grid.node_offset(r.kernel.x(i) - 1.0);
    worst = std::max(worst, std::abs(r.kernel.values[i] - theta.at_node(*k)));
  }
  EXPECT_LE(worst, 1e-9);
  EXPECT_TRUE(r.stationary);
}

TEST(RecoverKernel, IdentityGivesMollifier) {
  const double h = 0.002;
  RecoverOptions opt{Grid(0.0, h, 3000), -0.2, 0.2, 1, std::nullopt};
  auto r = recover_kernel(WienerHopfOperator::identity(), 100, 2.0, opt);
  SampledFunction theta = kernels::mollifier(h, 100);
  for (std::size_t i = 0; i < r.kernel.size(); ++i) {
    auto k = theta.grid.node_offset(r.kernel.x(i));
    EXPECT_NEAR(std::abs(r.kernel.values[i] - theta.at_node(*k)), 0.0, 1e-12);
  }
}

TEST(RecoverKernel, GaussianMatchesMollifiedKernel) {
  const double h = 0.002;
  const int n = 100;
  SampledFunction phi = kernels::gaussian(h, 0.3, 1.0, 1.0, 7.0);
  auto t = WienerHopfOperator::as_black_box(WienerHopfOperator::kernel(phi));
  RecoverOptions opt{Grid(0.0, h, 9000), -6.0, 6.0, 5, std::nullopt};
  auto r = recover_kernel(t, n, 7.0, opt);
  // (phi * theta_n)(y) with the continuous mollifier
  const double len = 1.0 / n;
  auto ref = [&](double y) {
    auto num = oracle::simpson([&](double u) { return std::exp(-0.5 * (y - u - 0.3) * (y - u - 0.3)) * oracle::bump(2 * u / len - 1); },
                               0.0, len, 400);
    return num / (0.5 * len * oracle::bump_mass());
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < r.kernel.size(); ++i) worst = std::max(worst, std::abs(r.kernel.values[i] - ref(r.kernel.x(i))));
  EXPECT_LE(worst, 1e-4);
  EXPECT_LE(r.stationarity, 1e-4);
  EXPECT_TRUE(r.stationary);
}

TEST(RecoverKernel, NonWienerHopfOperatorWarns) {
  const double h = 0.002;
  auto t = WienerHopfOperator::black_box([](const SampledFunction& f) {
    return SampledFunction::sample(f.grid, [&](double x) { return (1.0 + 0.1 * x) * f.values[f.grid.nearest(x)]; });
  });
  RecoverOptions opt{Grid(0.0, h, 3000), -0.2, 0.2, 1, std::nullopt};
  auto r = recover_kernel(t, 100, 2.0, opt);
  EXPECT_FALSE(r.stationary);
  EXPECT_FALSE(r.warning.empty());
}

TEST(RecoverKernel, ProbeOutsideGridAndCoarseScale) {
  const double h = 0.002;
  RecoverOptions opt{Grid(0.0, h, 1000), -1.0, 3.0, 1, std::nullopt};
  EXPECT_THROW(recover_kernel(WienerHopfOperator::identity(), 100, 1.0, opt), ProbeError);
  EXPECT_THROW(recover_kernel(WienerHopfOperator::identity(), 400, 1.0, opt), ScaleError);
}

TEST(Fejer, KernelMassIsOne) {
  for (double n : {1.0, 3.0, 10.0, 100.0}) {
    // integrate over |x| <= X and add the 2/(pi n X) tail of the averaged integrand
    double X = 2000.0 * oracle::pi / n;
    double core = 2.0 * oracle::simpson([n](double x) { return kernels::fejer(x, n); }, 0.0, X, 400000);
    EXPECT_NEAR(core + 2.0 / (oracle::pi * n * X), 1.0, 1e-6) << n;
  }
}

TEST(Fejer, SymbolWindowMultipliesSymbol) {
  const double h = 0.05;
  SampledFunction phi = kernels::gaussian(h, 0.7, 0.8);
  FejerOptions opt;
  opt.mode = FejerMode::symbol_window;
  opt.pad = 100.0;
  for (int n : {1, 4, 16}) {
    auto y = fejer_approximant(WienerHopfOperator::kernel(phi), n, h, opt);
    FrequencyFunction a = forward_transform(y.phi);
    FrequencyFunction b = forward_transform(phi.resampled_onto(y.phi.grid));
    for (std::size_t k = 0; k < a.size(); ++k)
      EXPECT_LE(std::abs(a.values[k] - kernels::triangle(b.xi(k), n) * b.values[k]), 1e-8);
  }
}

TEST(Fejer, ApproximantLadderConverges) {
  const double h = 0.02;
  Grid g(0.0, h, 2500);
  SampledFunction phi = kernels::gaussian(h, 0.0, 1.0);
  auto t = WienerHopfOperator::kernel(phi);
  SampledFunction f = bump_on(g, 20.0, 6.0, cplx(1.0, 0.5), 0.7);
  SampledFunction tf = apply_wh(t, f);
  double prev = INFINITY, last = 0.0;
  for (int n = 1; n <= 2048; n *= 2) {
    double e = lp_norm(apply_wh(fejer_approximant(t, n, h), f) - tf, 2.0) / lp_norm(tf, 2.0);
    EXPECT_LT(e, prev) << n;
    prev = last = e;
  }
  EXPECT_LE(last, 1e-3);
}
