#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dirgof/goftest.hpp"
#include "test_util.hpp"

using namespace dirgof;
using dirgof::testing::random_sample;
using dirgof::testing::rel_err;

namespace {

constexpr double pi = std::numbers::pi;

GofConfig gof_config(int p, double h, int B = 50) {
  GofConfig cfg;
  cfg.local.p = p;
  cfg.local.h = h;
  cfg.B = B;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST(Statistic, ZeroWhenModelInterpolates) {
  Rng rng = substream(80, {});
  PointMatrix x = sample_uniform(1, 40, rng);
  const LinearFamily fam(1);
  const Vector theta = (Vector(3) << 0.5, 1.0, -2.0).finished();
  const DirLinSample s(x, predict_batch(fam, theta, x));
  const GofConfig cfg = gof_config(1, 0.5);
  EXPECT_EQ(statistic(s, fam, theta, cfg), 0.0);
  const GofCache cache = build_cache(s.x, cfg);
  EXPECT_EQ(statistic(cache, Vector::Zero(40)), 0.0);
}

TEST(Statistic, ZeroWeightFunction) {
  Rng rng = substream(81, {});
  const DirLinSample s = random_sample(2, 40, rng);
  GofConfig cfg = gof_config(0, 0.6);
  cfg.weight = [](const Vector&) { return 0.0; };
  EXPECT_EQ(statistic(s, ConstantFamily(), Vector::Constant(1, s.y.mean()), cfg), 0.0);
}

class ResidualVsDirect : public ::testing::TestWithParam<std::tuple<int, int>> {};

TEST_P(ResidualVsDirect, FormsAgree) {
  const auto [q, p] = GetParam();
  Rng rng = substream(82, {static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(p)});
  GofConfig cfg = gof_config(p, 0.6);
  cfg.quad_resolution = q == 1 ? 64 : (q == 2 ? 16 : 400);
  cfg.weight = [](const Vector& x) { return 1.0 + 0.5 * x[0]; };
  for (int trial = 0; trial < 5; ++trial) {
    const DirLinSample s = random_sample(q, 60, rng);
    const LinearFamily fam(q);
    const ThetaEstimate est = fit(fam, s);
    const double fast = statistic(s, fam, est.theta, cfg);
    const double direct = statistic_direct(s, fam, est.theta, cfg);
    EXPECT_GT(fast, 0.0);
    EXPECT_LE(std::abs(fast - direct), 1e-10 * std::max(1.0, direct)) << "trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(DimsAndDegrees, ResidualVsDirect,
                         ::testing::Combine(::testing::Values(1, 2, 3), ::testing::Values(0, 1)));

TEST(Bootstrap, FastPathMatchesFromScratch) {
  for (auto hyp : {NullHypothesis::composite, NullHypothesis::simple}) {
    for (int q : {1, 2}) {
      Rng rng = substream(83, {static_cast<std::uint64_t>(q)});
      const DirLinSample s = random_sample(q, 50, rng);
      const LinearFamily fam(q);
      GofConfig cfg = gof_config(1, 0.7, 4);
      cfg.quad_resolution = q == 1 ? 64 : 16;
      cfg.hypothesis = hyp;
      cfg.theta0 = Vector::LinSpaced(q + 2, -0.5, 0.5);
      const GofCache cache = build_cache(s.x, cfg);
      const Matrix v = golden_section_matrix(s.size(), cfg.B, cfg.seed);
      const GofResult res = bootstrap_test(s, fam, cfg, cache, v);
      for (int b = 0; b < cfg.B; ++b) {
        const double scratch = bootstrap_statistic_from_scratch(s, fam, cfg, v.col(b));
        EXPECT_LE(std::abs(res.boot[b] - scratch), 1e-10 * std::max(1.0, scratch)) << "b = " << b;
      }
    }
  }
}

TEST(Bootstrap, NonlinearFamilyFastPathMatchesFromScratch) {
  Rng rng = substream(84, {});
  const DampedSineFamily fam;
  PointMatrix x = density_sample(model_m20(2), 80, rng);
  DirLinSample s(x, predict_batch(fam, (Vector(3) << 0.0, 3.0, 4.0).finished(), x));
  std::normal_distribution<double> nd(0.0, 0.5);
  for (Eigen::Index i = 0; i < s.size(); ++i) s.y[i] += nd(rng);
  GofConfig cfg = gof_config(0, 0.5, 3);
  cfg.quad_resolution = 16;
  const GofCache cache = build_cache(s.x, cfg);
  const Matrix v = golden_section_matrix(s.size(), cfg.B, cfg.seed);
  const GofResult res = bootstrap_test(s, fam, cfg, cache, v);
  EXPECT_EQ(res.failed_refits, 0);
  for (int b = 0; b < cfg.B; ++b) {
    const double scratch = bootstrap_statistic_from_scratch(s, fam, cfg, v.col(b));
    EXPECT_LE(std::abs(res.boot[b] - scratch), 1e-10 * std::max(1.0, scratch));
  }
}

TEST(Golden, MomentsAndSupport) {
  Rng rng = substream(85, {});
  const Vector v = golden_section_draws(1000000, rng);
  EXPECT_NEAR(v.mean(), 0.0, 0.005);
  EXPECT_NEAR(v.squaredNorm() / v.size(), 1.0, 0.005);
  EXPECT_NEAR(v.array().cube().mean(), 1.0, 0.01);
  const std::set<double> values(v.data(), v.data() + v.size());
  EXPECT_EQ(values.size(), 2u);
  // Exact two-point law.
  const double p = golden_low_prob;
  EXPECT_NEAR(p * golden_low + (1 - p) * golden_high, 0.0, 1e-15);
  EXPECT_NEAR(p * golden_low * golden_low + (1 - p) * golden_high * golden_high, 1.0, 1e-15);
  EXPECT_NEAR(p * std::pow(golden_low, 3) + (1 - p) * std::pow(golden_high, 3), 1.0, 1e-14);
  EXPECT_THROW(golden_section_draws(0, rng), Error);
}

TEST(Golden, MatrixColumnsUseOwnSubstreams) {
  const Matrix a = golden_section_matrix(30, 5, 9);
  const Matrix b = golden_section_matrix(30, 8, 9);
  EXPECT_EQ(a, b.leftCols(5));
  EXPECT_NE(a, golden_section_matrix(30, 5, 9, 1));
}

TEST(Bootstrap, SingleReplicateGivesZeroOrOne) {
  Rng rng = substream(86, {});
  for (int rep = 0; rep < 5; ++rep) {
    const DirLinSample s = random_sample(1, 40, rng);
    GofConfig cfg = gof_config(0, 0.5, 1);
    cfg.seed = rep;
    const GofResult res = bootstrap_test(s, ConstantFamily(), cfg);
    EXPECT_TRUE(res.p_value == 0.0 || res.p_value == 1.0);
    EXPECT_EQ(res.boot.size(), 1);
  }
}

TEST(Bootstrap, PValueDefinitionAndRange) {
  const Vector boot = (Vector(5) << 0.1, 0.2, 0.3, 0.3, 0.5).finished();
  EXPECT_DOUBLE_EQ(bootstrap_p_value(0.3, boot), 0.6);
  EXPECT_DOUBLE_EQ(bootstrap_p_value(0.6, boot), 0.0);
  EXPECT_DOUBLE_EQ(bootstrap_p_value(0.0, boot), 1.0);
  Rng rng = substream(87, {});
  const DirLinSample s = random_sample(2, 50, rng);
  const GofResult res = bootstrap_test(s, LinearFamily(2), gof_config(1, 0.6, 40));
  EXPECT_GE(res.statistic, 0.0);
  EXPECT_GE(res.p_value, 0.0);
  EXPECT_LE(res.p_value, 1.0);
  EXPECT_EQ(res.B, 40);
  EXPECT_GE(res.boot.minCoeff(), 0.0);
}

TEST(Bootstrap, DeterministicAcrossWorkerCounts) {
  Rng rng = substream(88, {});
  const DirLinSample s = random_sample(1, 60, rng);
  GofConfig cfg = gof_config(1, 0.5, 30);
  const GofResult a = bootstrap_test(s, LinearFamily(1), cfg);
  cfg.workers = 4;
  const GofResult b = bootstrap_test(s, LinearFamily(1), cfg);
  EXPECT_EQ(a.boot, b.boot);
  EXPECT_EQ(a.p_value, b.p_value);
}

TEST(Bootstrap, SimpleNullNeedsTheta0) {
  Rng rng = substream(89, {});
  const DirLinSample s = random_sample(1, 30, rng);
  GofConfig cfg = gof_config(0, 0.5, 5);
  cfg.hypothesis = NullHypothesis::simple;
  EXPECT_THROW(bootstrap_test(s, LinearFamily(1), cfg), Error);
  cfg.theta0 = Vector::Zero(3);
  const GofResult res = bootstrap_test(s, LinearFamily(1), cfg);
  EXPECT_EQ(res.theta_hat, Vector::Zero(3));
}

TEST(Bootstrap, ConfigValidation) {
  GofConfig cfg = gof_config(1, 0.5, 0);
  EXPECT_THROW(cfg.validate(), Error);
  cfg.B = 10;
  cfg.local.h = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.local.h = 0.5;
  cfg.quad_resolution = 3;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Invariance, SamplePermutation) {
  Rng rng = substream(90, {});
  const DirLinSample s = random_sample(2, 50, rng);
  const DirLinSample r(s.x.colwise().reverse(), s.y.reverse());
  const LinearFamily fam(2);
  const GofConfig cfg = gof_config(1, 0.6);
  const double a = statistic(s, fam, fit(fam, s).theta, cfg);
  const double b = statistic(r, fam, fit(fam, r).theta, cfg);
  EXPECT_LT(rel_err(a, b), 1e-12);
}

TEST(Invariance, ConstantShiftUnderConstantFamily) {
  Rng rng = substream(91, {});
  const DirLinSample s = random_sample(1, 50, rng);
  const DirLinSample shifted(s.x, (s.y.array() + 7.5).matrix());
  const ConstantFamily fam;
  const GofConfig cfg = gof_config(0, 0.4);
  const double a = statistic(s, fam, fit(fam, s).theta, cfg);
  const double b = statistic(shifted, fam, fit(fam, shifted).theta, cfg);
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(Quadrature, DefaultResolution) {
  EXPECT_EQ(default_quad_resolution(1, 0.5, QuadratureScheme::grid), 256);
  EXPECT_EQ(default_quad_resolution(2, 0.5, QuadratureScheme::grid), 48);
  EXPECT_EQ(default_quad_resolution(3, 0.5, QuadratureScheme::monte_carlo), 20000);
  EXPECT_EQ(default_quad_resolution(1, 0.05, QuadratureScheme::grid), static_cast<int>(std::ceil(8.0 * pi / 0.05)));
  EXPECT_EQ(resolved_scheme(GofConfig{}, 2), QuadratureScheme::grid);
  EXPECT_EQ(resolved_scheme(GofConfig{}, 3), QuadratureScheme::monte_carlo);
}

TEST(CenterScale, Examples) {
  LocalFitConfig lc;
  lc.p = 1;
  lc.h = 0.2;
  const double nu2 = nu_squared(DirectionalKernel::von_mises(), 1, pi / 2.0);
  // sigma^2 = 1/2 over the circle: int sigma^2 = pi.
  const CenterScale cs = asymptotic_center_scale(lc, 1, pi, nu2, 1000);
  EXPECT_LT(rel_err(cs.center, std::sqrt(pi) / 400.0), 1e-8);
  EXPECT_NEAR(cs.center, 4.4311e-3, 1e-7);
  EXPECT_NEAR(cs.scale * cs.scale, 0.626657, 1e-6);
  double prev = cs.center;
  for (double h : {0.1, 0.05, 0.01}) {
    lc.h = h;
    const double c = asymptotic_center_scale(lc, 1, pi, nu2, 1000).center;
    EXPECT_GT(c, prev);
    prev = c;
  }
  EXPECT_THROW(asymptotic_center_scale(lc, 1, 0.0, nu2, 1000), Error);
}

TEST(CenterScale, StandardizedStatistic) {
  const CenterScale cs{0.01, 2.0};
  EXPECT_NEAR(standardized_statistic(0.03, cs, 100, 0.25, 2), 100 * 0.25 * 0.02 / 2.0, 1e-15);
}

TEST(CenterScale, VarianceIntegralsForConstantResiduals) {
  Rng rng = substream(92, {});
  const PointMatrix x = sample_uniform(1, 80, rng);
  const GofCache cache = build_cache(x, gof_config(0, 0.5));
  const VarianceIntegrals vi = variance_integrals(cache, Vector::Constant(80, std::sqrt(0.5)));
  EXPECT_NEAR(vi.sigma2_w, pi, 1e-9);
  EXPECT_NEAR(vi.sigma4_w2, pi / 2.0, 1e-9);
}
