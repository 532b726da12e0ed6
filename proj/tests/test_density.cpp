#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dirgof/density.hpp"
#include "dirgof/stats.hpp"
#include "test_util.hpp"

using namespace dirgof;
using dirgof::testing::rel_err;

namespace {

constexpr double pi = std::numbers::pi;

double two_sample_ks_p(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
  return stats::kolmogorov_sf(std::sqrt(ne) * d);
}

std::vector<DirDensityModel> all_models(int q) {
  return {model_m1(q), model_m4(q), model_m12(q), model_m16(q), model_m20(q),
          model_m4(q).blend(0.6, model_m1(q)), DirDensityModel::vmf(Vector::Unit(q + 1, 0), 30.0)};
}

}  // namespace

TEST(DensityModel, Validation) {
  EXPECT_THROW(DirDensityModel(1, {{Vector(), 1.0, 0.4}, {Vector(), 1.0, 0.4}}), Error);
  EXPECT_THROW(DirDensityModel(1, {{Vector(), 1.0, -1.0}, {Vector(), 1.0, 2.0}}), Error);
  EXPECT_THROW(DirDensityModel(1, {{Vector::Ones(3), 1.0, 1.0}}), Error);
  EXPECT_THROW(DirDensityModel(1, {{Vector(), -1.0, 1.0}}), Error);
  EXPECT_THROW(DirDensityModel(1, {}), Error);
  EXPECT_EQ(model_m1(2).kind(), DensityKind::uniform);
  EXPECT_EQ(model_m4(2).kind(), DensityKind::vmf);
  EXPECT_EQ(model_m12(2).kind(), DensityKind::mixture);
}

TEST(DensityEval, UniformAndSmallConcentration) {
  EXPECT_NEAR(density_eval(model_m1(1), Vector::Unit(2, 0)), 1.0 / (2.0 * pi), 1e-15);
  for (int q = 1; q <= 4; ++q) {
    const Vector x = Vector::Unit(q + 1, 0);
    const double uniform = 1.0 / surface_area(q);
    EXPECT_LT(rel_err(density_eval(DirDensityModel::vmf(Vector::Unit(q + 1, q), 0.0), x), uniform), 1e-12);
    EXPECT_LT(rel_err(density_eval(DirDensityModel::vmf(Vector::Unit(q + 1, q), 1e-13), x), uniform), 1e-12);
  }
}

TEST(DensityEval, VonMisesCircleOracle) {
  const double kappa = 3.0;
  const Vector x = (Vector(2) << std::cos(0.7), std::sin(0.7)).finished();
  const double oracle = std::exp(kappa * std::cos(0.7)) / (2.0 * pi * std::cyl_bessel_i(0.0, kappa));
  EXPECT_LT(rel_err(density_eval(DirDensityModel::vmf(Vector::Unit(2, 0), kappa), x), oracle), 1e-12);
}

TEST(DensityEval, IntegratesToOne) {
  const auto circle = build_quadrature(1, 2000, QuadratureScheme::grid);
  const auto sphere = build_quadrature(2, 150, QuadratureScheme::grid);
  for (const auto& m : all_models(1)) {
    EXPECT_NEAR(integrate(circle, [&](const Vector& x) { return density_eval(m, x); }).value, 1.0, 1e-4)
        << m.label();
  }
  for (const auto& m : all_models(2)) {
    EXPECT_NEAR(integrate(sphere, [&](const Vector& x) { return density_eval(m, x); }).value, 1.0, 1e-4)
        << m.label();
  }
  const auto mc = build_quadrature(3, 200000, QuadratureScheme::monte_carlo, 9);
  for (const auto& m : {model_m4(3), model_m12(3), model_m16(3)}) {
    const IntegralEstimate est = integrate(mc, [&](const Vector& x) { return density_eval(m, x); });
    EXPECT_LE(std::abs(est.value - 1.0), 3.0 * std::sqrt(est.variance) + 1e-12) << m.label();
  }
}

TEST(DensitySample, UniformModelMatchesSampleUniform) {
  Rng a = substream(21, {1});
  Rng b = substream(21, {2});
  const PointMatrix s1 = density_sample(model_m1(2), 10000, a);
  const PointMatrix s2 = sample_uniform(2, 10000, b);
  std::vector<double> x1(s1.col(0).data(), s1.col(0).data() + 10000);
  std::vector<double> x2(s2.col(0).data(), s2.col(0).data() + 10000);
  EXPECT_GT(two_sample_ks_p(x1, x2), 0.01);
}

TEST(DensitySample, VmfMeanResultant) {
  for (int q = 1; q <= 3; ++q) {
    Rng rng = substream(22, {static_cast<std::uint64_t>(q)});
    const Vector mu = Vector::Unit(q + 1, q);
    const PointMatrix s = density_sample(DirDensityModel::vmf(mu, 5.0), 10000, rng);
    const Vector t = s * mu;
    const double mean = t.mean();
    const double se = std::sqrt((t.array() - mean).square().sum() / (t.size() - 1) / t.size());
    EXPECT_LE(std::abs(mean - vmf_mean_resultant(q, 5.0)), 3.0 * se) << "q = " << q;
    EXPECT_LE((s.rowwise().norm().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(DensitySample, MeanResultantOracleValues) {
  // Circle: I_1 / I_0; 2-sphere: coth(kappa) - 1 / kappa.
  EXPECT_LT(rel_err(vmf_mean_resultant(1, 5.0), std::cyl_bessel_i(1.0, 5.0) / std::cyl_bessel_i(0.0, 5.0)), 1e-12);
  EXPECT_LT(rel_err(vmf_mean_resultant(2, 5.0), 1.0 / std::tanh(5.0) - 0.2), 1e-12);
}

TEST(DensitySample, AntipodalMixtureIsCentered) {
  Rng rng = substream(23, {});
  const Vector mu = Vector::Unit(3, 0);
  const DirDensityModel m(2, {{mu, 10.0, 0.5}, {-mu, 10.0, 0.5}});
  const PointMatrix s = density_sample(m, 10000, rng);
  EXPECT_LT(s.colwise().mean().norm(), 0.05);
}

TEST(Kde, SinglePointAtItself) {
  PointMatrix s(1, 3);
  s.row(0) = Eigen::RowVector3d(0.0, 0.6, 0.8);
  const SpherePoint x{0.0, 0.6, 0.8};
  const auto vm = DirectionalKernel::von_mises();
  EXPECT_LT(rel_err(kde(x, s, 0.3, vm), normalizing_constant(vm, 2, 0.3)), 1e-14);
  EXPECT_THROW(kde(SpherePoint{1.0, 0.0}, s, 0.3, vm), Error);
}

TEST(Kde, UnitIntegralAndPermutationInvariance) {
  Rng rng = substream(24, {});
  const PointMatrix s = sample_uniform(1, 5000, rng);
  const BandwidthKernel bk(DirectionalKernel::von_mises(), 1, 0.4);
  const auto quad = build_quadrature(1, 2000, QuadratureScheme::grid);
  const double total = integrate(quad, [&](const Vector& x) { return kde(x, s, bk); }).value;
  EXPECT_NEAR(total, 1.0, 1e-6);

  PointMatrix rev = s.colwise().reverse();
  const Vector x = (Vector(2) << 0.6, 0.8).finished();
  EXPECT_NEAR(kde(x, s, bk), kde(x, rev, bk), 1e-13);
  for (Eigen::Index k = 0; k < quad.node_count(); k += 50) {
    EXPECT_GE(kde(quad.nodes.row(k).transpose(), s, bk), 0.0);
  }
}

TEST(Kde, ConsistentForVonMisesSample) {
  Rng rng = substream(25, {});
  const DirDensityModel m = DirDensityModel::vmf(Vector::Unit(3, 2), 2.0);
  const int n = 5000;
  const PointMatrix s = density_sample(m, n, rng);
  const BandwidthKernel bk(DirectionalKernel::von_mises(), 2, std::pow(n, -1.0 / 6.0));
  const auto quad = build_quadrature(2, 30, QuadratureScheme::grid);
  double sup = 0.0;
  for (Eigen::Index k = 0; k < quad.node_count(); ++k) {
    const Vector x = quad.nodes.row(k).transpose();
    sup = std::max(sup, std::abs(kde(x, s, bk) - density_eval(m, x)));
  }
  EXPECT_LT(sup, 0.1);
}

TEST(Kde, IntegratedErrorShrinksWithN) {
  const DirDensityModel m = model_m12(1);
  const auto quad = build_quadrature(1, 512, QuadratureScheme::grid);
  auto ise = [&](int n) {
    Rng rng = substream(26, {static_cast<std::uint64_t>(n)});
    const PointMatrix s = density_sample(m, n, rng);
    const BandwidthKernel bk(DirectionalKernel::von_mises(), 1, 0.6 * std::pow(n, -0.2));
    return integrate(quad, [&](const Vector& x) {
             const double e = kde(x, s, bk) - density_eval(m, x);
             return e * e;
           }).value;
  };
  EXPECT_LT(ise(5000), ise(500));
}
