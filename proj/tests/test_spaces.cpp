#include <gtest/gtest.h>

#include <whlab/spaces.hpp>

#include "oracles.hpp"

using namespace whlab;
using oracle::cplx;

namespace {

// Zigzag profile by walking the blocks explicitly.
double zigzag_walk(double x) {
  double s = std::min(x, 1.0);
  if (x <= 1.0) return s;
  double start = 1.0, slope = -1.0;
  while (true) {
    double stop = 2.0 * start;
    if (x <= stop) return s + slope * (x - start);
    s += slope * (stop - start);
    start = stop;
    slope = -slope;
  }
}

double brute_sup(const std::function<double(double)>& logw, double n, double range, double step) {
  double best = -INFINITY;
  for (double x = 0.0; x <= range; x += step)
    best = std::max(best, n >= 0 ? logw(x + n) - logw(x) : logw(x) - logw(x - n));
  return best;
}

SampledFunction random_function(oracle::Rng& rng, const Grid& g) {
  SampledFunction f(g);
  int k = rng.integer(1, 4);
  for (int b = 0; b < k; ++b) {
    double c = rng.uniform(2.0, g.end() - 2.0), r = rng.uniform(0.3, 1.9);
    cplx a = rng.complex_normal();
    double kappa = rng.uniform(-4, 4);
    for (std::size_t i = 0; i < g.count; ++i)
      f.values[i] += a * oracle::bump((g.at(i) - c) / r) * std::polar(1.0, kappa * g.at(i));
  }
  return f;
}

}  // namespace

TEST(Weights, ZigzagProfileMatchesBlockWalk) {
  for (double x = 0.0; x < 1100.0; x += 0.37) EXPECT_NEAR(zigzag_profile(x), zigzag_walk(x), 1e-9) << x;
  EXPECT_DOUBLE_EQ(zigzag_profile(2.0), 0.0);
  EXPECT_DOUBLE_EQ(zigzag_profile(4.0), 2.0);
  EXPECT_DOUBLE_EQ(zigzag_profile(8.0), -2.0);
  EXPECT_DOUBLE_EQ(zigzag_profile(256.0), 86.0);
}

TEST(Admissibility, ConstantWeightPassesWithUnitRatios) {
  Grid g(0.0, 0.05, 1601);
  auto rep = check_admissibility(Weight::constant(3.0), {0.5, 1, 2, 4}, g);
  EXPECT_TRUE(rep.pass);
  for (auto& r : rep.rows) {
    EXPECT_EQ(r.log_up, 0.0);
    EXPECT_EQ(r.log_down, 0.0);
  }
}

TEST(Admissibility, ExponentialRatiosAreClosedForm) {
  Grid g(0.0, 0.05, 1601);
  auto rep = check_admissibility(Weight::exponential(1.0), {0.5, 1, 2, 4}, g);
  EXPECT_TRUE(rep.pass) << rep.diagnostic;
  for (auto& r : rep.rows) {
    EXPECT_NEAR(r.log_up, r.offset, 1e-12);
    EXPECT_NEAR(r.log_down, -r.offset, 1e-12);
  }
}

TEST(Admissibility, SquareExponentialFails) {
  Grid g(0.0, 0.05, 1601);
  auto w = Weight::custom("exp(x^2)", [](double x) { return x * x; });
  auto rep = check_admissibility(w, {0.5, 1, 2, 4}, g);
  EXPECT_FALSE(rep.pass);
  EXPECT_NE(rep.diagnostic.find("up-ratio"), std::string::npos) << rep.diagnostic;
}

TEST(Admissibility, ZigzagPasses) {
  Grid g(0.0, 0.01, 8001);
  auto rep = check_admissibility(Weight::dyadic_zigzag(1.0), {0.5, 1, 2, 4}, g);
  EXPECT_TRUE(rep.pass) << rep.diagnostic;
}

TEST(Admissibility, NonPositiveWeightRejected) {
  Grid g(0.0, 0.5, 20);
  auto w = Weight::custom("vanishing", [](double x) { return x < 3 ? 0.0 : -INFINITY; });
  EXPECT_THROW(check_admissibility(w, {1.0}, g), WeightError);
}

TEST(LpNorm, SmoothIndicatorHasUnitNorm) {
  const double d = 1e-3;
  auto ramp = [d](double t) {  // C-infinity step from 0 (t<=0) to 1 (t>=d)
    if (t <= 0) return 0.0;
    if (t >= d) return 1.0;
    double a = std::exp(-1.0 / (t / d)), b = std::exp(-1.0 / (1.0 - t / d));
    return a / (a + b);
  };
  auto f = [&](double x) { return ramp(x) * ramp(1.0 - x); };
  Grid g(0.0, 2.5e-5, 40001);
  SampledFunction s = SampledFunction::sample(g, [&](double x) { return cplx(f(x)); });
  double ref = std::sqrt(oracle::simpson([&](double x) { return f(x) * f(x); }, 0.0, 1.0, 200000));
  double v = lp_norm(s, 2.0, Weight::constant());
  EXPECT_NEAR(v, ref, 1e-6);
  EXPECT_NEAR(v, 1.0, 1e-3);
}

TEST(LpNorm, ZeroAndHomogeneity) {
  Grid g(0.0, 0.01, 2000);
  EXPECT_EQ(lp_norm(SampledFunction(g), 2.0), 0.0);
  oracle::Rng rng(3);
  SampledFunction f = random_function(rng, g);
  for (auto w : {Weight::constant(), Weight::exponential(0.7), Weight::dyadic_zigzag(1.0)})
    for (double p : {1.0, 1.5, 2.0, 3.0}) EXPECT_NEAR(lp_norm(2.0 * f, p, w) / lp_norm(f, p, w), 2.0, 2e-12);
}

TEST(LpNorm, LogSpaceAvoidsOverflow) {
  // omega = e^{1.05x} overflows on its own past x ~ 676; the product with f does not
  Grid g(0.0, 0.2, 3501);
  SampledFunction f = SampledFunction::sample(g, [](double x) { return cplx(std::exp(-x)); });
  double ref = 0.0;
  for (std::size_t i = 0; i < g.count; ++i) ref += (i == 0 || i + 1 == g.count ? 0.1 : 0.2) * std::exp(0.05 * g.at(i));
  double v = lp_norm(f, 1.0, Weight::exponential(1.05));
  EXPECT_NEAR(v / ref, 1.0, 1e-12);
  EXPECT_THROW(lp_norm(SampledFunction::sample(g, [](double) { return cplx(1.0); }), 1.0, Weight::exponential(1.05)),
               OverflowError);
}

TEST(Luxemburg, PowerFamilyEqualsLp) {
  oracle::Rng rng(5);
  Grid g(0.0, 0.01, 3000);
  for (int t = 0; t < 10; ++t) {
    SampledFunction f = random_function(rng, g);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      double a = luxemburg_norm(f, OrliczFunction::power(p));
      EXPECT_NEAR(a / lp_norm(f, p), 1.0, 1e-8);
      // omega(x) dx measure == L^p with weight omega^{1/p}
      double b = luxemburg_norm(f, OrliczFunction::power(p), Weight::exponential(0.3));
      EXPECT_NEAR(b / lp_norm(f, p, Weight::exponential(0.3 / p)), 1.0, 1e-8);
    }
  }
}

TEST(Luxemburg, ZeroHomogeneityAndModular) {
  Grid g(0.0, 0.01, 3000);
  EXPECT_EQ(luxemburg_norm(SampledFunction(g), OrliczFunction::exp()), 0.0);
  oracle::Rng rng(6);
  for (auto A : {OrliczFunction::exp(), OrliczFunction::ylog(), OrliczFunction::power(2.5)}) {
    SampledFunction f = random_function(rng, g);
    auto r = luxemburg_detail(f, A, nullptr);
    EXPECT_LE(std::abs(r.modular - 1.0), 1e-10) << A.name;
    cplx c = rng.complex_normal();
    EXPECT_NEAR(luxemburg_norm(c * f, A) / (std::abs(c) * r.value), 1.0, 1e-8) << A.name;
  }
}

TEST(Luxemburg, BracketFailureReportsRange) {
  Grid g(0.0, 0.01, 100);
  OrliczFunction tiny{"tiny", 0.0, [](double y) { return 1e-300 * y; }};
  SampledFunction f = SampledFunction::sample(g, [](double) { return cplx(1.0); });
  EXPECT_THROW(luxemburg_norm(f, tiny), BracketError);
}

TEST(Orlicz, BuiltinsValidAndBadOneRejected) {
  for (auto A : {OrliczFunction::exp(), OrliczFunction::ylog(), OrliczFunction::power(1.0), OrliczFunction::power(3.0)})
    EXPECT_TRUE(check_orlicz(A).pass) << A.name;
  OrliczFunction root{"sqrt", 0.0, [](double y) { return std::sqrt(y); }};
  EXPECT_FALSE(check_orlicz(root).pass);
  OrliczFunction shifted{"shifted", 0.0, [](double y) { return y + 1.0; }};
  EXPECT_FALSE(check_orlicz(shifted).pass);
}

TEST(TranslationNorm, ClosedForms) {
  for (double n : {0.5, 1.0, 3.0, 10.0}) {
    EXPECT_EQ(translation_norm(Weight::constant(), 2.0, n), 1.0);
    EXPECT_EQ(translation_norm(Weight::constant(), 2.0, -n), 1.0);
    EXPECT_NEAR(translation_norm(Weight::exponential(0.8), 1.5, n), std::exp(0.8 * n), 1e-12 * std::exp(0.8 * n));
    EXPECT_NEAR(translation_norm(Weight::exponential(0.8), 3.0, -n), std::exp(-0.8 * n), 1e-12);
  }
}

TEST(TranslationNorm, ExactFormulasAgreeWithBruteForce) {
  for (auto w : {Weight::power(2.0), Weight::power(-1.5), Weight::capped_exponential(1.0, 5.0),
                 Weight::capped_exponential(-0.5, 3.0)}) {
    for (double n : {-4.0, -1.0, 0.5, 2.0, 7.0}) {
      double exact = *w.exact_log_ratio(n);
      double brute = brute_sup([&](double x) { return w.log_value(x); }, n, 40000.0, 1.0 / 4);
      EXPECT_NEAR(exact, brute, 2e-3) << w.describe() << " n=" << n;
      EXPECT_GE(exact + 1e-12, brute);
    }
  }
}

TEST(TranslationNorm, ZigzagRealizesBothSups) {
  auto w = Weight::dyadic_zigzag(1.0);
  for (double n : {0.5, 1.0, 3.0, 8.0, 64.0}) {
    double brute_up = brute_sup(zigzag_walk, n, 1024.0, 1.0 / 256);
    double brute_down = brute_sup(zigzag_walk, -n, 1024.0, 1.0 / 256);
    EXPECT_NEAR(brute_up, n, 1e-9);
    EXPECT_NEAR(brute_down, n, 1e-9);
    EXPECT_NEAR(translation_norm(w, 2.0, n), std::exp(n), 1e-9 * std::exp(n));
    EXPECT_NEAR(translation_norm(w, 2.0, -n), std::exp(n), 1e-9 * std::exp(n));
  }
}

TEST(TranslationNorm, SubmultiplicativeAndInverseBound) {
  std::vector<Weight> ws{Weight::constant(), Weight::power(2.0), Weight::power(-1.0), Weight::exponential(-0.6),
                         Weight::capped_exponential(1.0, 4.0), Weight::dyadic_zigzag(1.0), Weight::dyadic_zigzag(0.4)};
  std::vector<double> ns{0.5, 1.0, 2.0, 3.0, 5.0};
  for (auto& w : ws)
    for (double m : ns) {
      for (double n : ns) {
        double lhs = translation_norm(w, 2.0, m + n);
        double rhs = translation_norm(w, 2.0, m) * translation_norm(w, 2.0, n);
        EXPECT_LE(lhs, rhs * (1.0 + 1e-9)) << w.describe();
      }
      EXPECT_GE(translation_norm(w, 2.0, m) * translation_norm(w, 2.0, -m), 1.0 - 1e-12) << w.describe();
    }
}

TEST(SpaceSpec, NormAxiomsOnRandomInstances) {
  oracle::Rng rng(9);
  Grid g(0.0, 0.02, 1500);
  std::vector<SpaceSpec> specs{SpaceSpec::lp(1.0, Weight::exponential(0.5)), SpaceSpec::lp(1.5, Weight::power(2.0)),
                               SpaceSpec::lp(2.0, Weight::dyadic_zigzag(1.0)), SpaceSpec::lp(3.0),
                               SpaceSpec::orlicz(OrliczFunction::exp()), SpaceSpec::orlicz(OrliczFunction::ylog()),
                               SpaceSpec::weighted_orlicz(OrliczFunction::ylog(), Weight::exponential(0.2))};
  for (auto& s : specs) {
    for (int t = 0; t < 5; ++t) {
      SampledFunction f = random_function(rng, g), h = random_function(rng, g);
      double nf = s.norm(f), nh = s.norm(h);
      EXPECT_GT(nf, 0.0) << s.describe();
      EXPECT_LE(s.norm(f + h), (nf + nh) * (1 + 1e-10)) << s.describe();
      cplx c = rng.complex_normal();
      EXPECT_NEAR(s.norm(c * f) / (std::abs(c) * nf), 1.0, 1e-8) << s.describe();
    }
    EXPECT_EQ(s.norm(SampledFunction(g)), 0.0);
  }
}
