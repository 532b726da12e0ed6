#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dirgof/sphere.hpp"
#include "test_util.hpp"

using namespace dirgof;
using dirgof::testing::random_unit;

TEST(SurfaceArea, KnownValues) {
  EXPECT_NEAR(surface_area(0), 2.0, 1e-14);
  EXPECT_NEAR(surface_area(1), 2.0 * std::numbers::pi, 1e-13);
  EXPECT_NEAR(surface_area(2), 4.0 * std::numbers::pi, 1e-13);
  EXPECT_NEAR(surface_area(3), 2.0 * std::numbers::pi * std::numbers::pi, 1e-12);
}

TEST(SpherePoint, NormalizesAndRejectsDegenerate) {
  const SpherePoint x{3.0, 4.0};
  EXPECT_NEAR(x.coords().norm(), 1.0, 1e-15);
  EXPECT_NEAR(x[0], 0.6, 1e-15);
  EXPECT_THROW(SpherePoint({0.0, 0.0}), Error);
  EXPECT_THROW(SpherePoint({1.0}), Error);
}

TEST(ProjectionBasis, CircleAtEast) {
  const ProjectionBasis b = projection_basis(SpherePoint{1.0, 0.0});
  ASSERT_EQ(b.columns.rows(), 2);
  ASSERT_EQ(b.columns.cols(), 1);
  EXPECT_NEAR(std::abs(b.columns(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(b.columns(0, 0), 0.0, 1e-15);
}

TEST(ProjectionBasis, NorthPoleSpansEquator) {
  const ProjectionBasis b = projection_basis(SpherePoint{0.0, 0.0, 1.0});
  const Matrix p = b.columns * b.columns.transpose();
  const Matrix expected = Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal();
  EXPECT_NEAR((p - expected).norm(), 0.0, 1e-14);
}

class BasisProperty : public ::testing::TestWithParam<int> {};

TEST_P(BasisProperty, InvariantsOnRandomPoints) {
  const int q = GetParam();
  Rng rng = substream(101, {static_cast<std::uint64_t>(q)});
  for (int trial = 0; trial < 1000; ++trial) {
    const SpherePoint x(random_unit(q + 1, rng));
    const Matrix b = projection_basis(x).columns;
    EXPECT_LE((b.transpose() * b - Matrix::Identity(q, q)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((b.transpose() * x.coords()).cwiseAbs().maxCoeff(), 1e-10);
    const Matrix proj = Matrix::Identity(q + 1, q + 1) - x.coords() * x.coords().transpose();
    EXPECT_LE((b * b.transpose() - proj).cwiseAbs().maxCoeff(), 1e-10);
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, BasisProperty, ::testing::Values(1, 2, 3, 5, 10));

TEST(ProjectionBasis, DeterministicAndPivotSafe) {
  const SpherePoint x{1e-9, 1.0, -1e-9};
  const Matrix b1 = projection_basis(x).columns;
  const Matrix b2 = projection_basis(x).columns;
  EXPECT_EQ((b1 - b2).norm(), 0.0);
  EXPECT_LE((b1.transpose() * b1 - Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(TangentNormal, Examples) {
  const SpherePoint x{1.0, 0.0};
  const SpherePoint same = tangent_normal_point(x, 1.0, Vector::Ones(1));
  EXPECT_NEAR((same.coords() - x.coords()).norm(), 0.0, 1e-15);
  const SpherePoint side = tangent_normal_point(x, 0.0, Vector::Ones(1));
  EXPECT_NEAR(side[0], 0.0, 1e-15);
  EXPECT_NEAR(std::abs(side[1]), 1.0, 1e-15);
  EXPECT_THROW(tangent_normal_point(x, 1.5, Vector::Ones(1)), Error);
}

TEST(TangentNormal, PreservesNormWithoutRenormalizing) {
  Rng rng = substream(7, {});
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int q : {1, 2, 4}) {
    for (int trial = 0; trial < 500; ++trial) {
      const ProjectionBasis b = projection_basis(SpherePoint(random_unit(q + 1, rng)));
      const double t = unif(rng);
      const Vector xi = random_unit(q, rng);
      const Vector raw = t * b.base_point.coords() + std::sqrt(1.0 - t * t) * (b.columns * xi);
      EXPECT_NEAR(raw.norm(), 1.0, 1e-12);
      EXPECT_NEAR(tangent_normal_point(b, t, xi).coords().norm(), 1.0, 1e-12);
    }
  }
}

TEST(SampleUniform, NormsAndMoments) {
  Rng rng = substream(99, {});
  const PointMatrix s2 = sample_uniform(2, 100000, rng);
  EXPECT_LE((s2.rowwise().norm().array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_LT(s2.colwise().mean().norm(), 0.02);
  const PointMatrix s1 = sample_uniform(1, 100000, rng);
  EXPECT_NEAR(s1.col(0).squaredNorm() / 100000.0, 0.5, 0.01);
}

namespace {

// Closed-form moments over the q-sphere: odd moments vanish,
// int x_i x_j = delta_ij omega_q / (q+1), int x_i^4 = 3 omega_q / ((q+1)(q+3)),
// int x_i^2 x_j^2 = omega_q / ((q+1)(q+3)) for i != j.
void check_moments(const SphereQuadrature& quad, double tol) {
  const int q = quad.q;
  const double area = surface_area(q);
  EXPECT_NEAR(quad.weights.sum(), area, 1e-8);
  for (int i = 0; i <= q; ++i) {
    EXPECT_NEAR(integrate(quad, [&](const Vector& x) { return x[i]; }).value, 0.0, tol);
    for (int j = 0; j <= q; ++j) {
      const double expect = i == j ? area / (q + 1) : 0.0;
      EXPECT_NEAR(integrate(quad, [&](const Vector& x) { return x[i] * x[j]; }).value, expect, tol);
      for (int k = 0; k <= q; ++k) {
        EXPECT_NEAR(integrate(quad, [&](const Vector& x) { return x[i] * x[j] * x[k]; }).value, 0.0, tol);
      }
    }
    EXPECT_NEAR(integrate(quad, [&](const Vector& x) { return std::pow(x[i], 4); }).value,
                3.0 * area / ((q + 1) * (q + 3)), tol);
  }
  EXPECT_NEAR(integrate(quad, [&](const Vector& x) { return x[0] * x[0] * x[q] * x[q]; }).value,
              area / ((q + 1) * (q + 3)), tol);
}

}  // namespace

TEST(Quadrature, CircleGridExact) {
  const SphereQuadrature quad = build_quadrature(1, 100, QuadratureScheme::grid);
  EXPECT_NEAR(integrate(quad, [](const Vector&) { return 1.0; }).value, 2.0 * std::numbers::pi, 1e-13);
  check_moments(quad, 1e-12);
}

TEST(Quadrature, SphereGridMoments) {
  const SphereQuadrature quad = build_quadrature(2, 40, QuadratureScheme::grid);
  EXPECT_EQ(quad.node_count(), 1600);
  EXPECT_NEAR(integrate(quad, [](const Vector& x) { return x[2] * x[2]; }).value,
              4.0 * std::numbers::pi / 3.0, 1e-8);
  check_moments(quad, 1e-8);
  for (Eigen::Index k = 0; k < quad.node_count(); ++k) {
    EXPECT_NEAR(quad.nodes.row(k).norm(), 1.0, 1e-12);
    EXPECT_GT(quad.weights[k], 0.0);
  }
}

TEST(Quadrature, MonteCarloWithinStandardErrors) {
  const SphereQuadrature quad = build_quadrature(3, 100000, QuadratureScheme::monte_carlo, 5);
  EXPECT_NEAR(quad.weights.sum(), surface_area(3), 1e-9);
  const double area = surface_area(3);
  auto check = [&](auto f, double expect) {
    const IntegralEstimate est = integrate(quad, f);
    EXPECT_GT(est.variance, 0.0);
    EXPECT_LE(std::abs(est.value - expect), 3.0 * std::sqrt(est.variance));
  };
  check([](const Vector& x) { return x[0]; }, 0.0);
  check([](const Vector& x) { return x[1] * x[1]; }, area / 4.0);
  check([](const Vector& x) { return x[0] * x[2]; }, 0.0);
}

TEST(Quadrature, MonteCarloSeeded) {
  const auto a = build_quadrature(3, 64, QuadratureScheme::monte_carlo, 17);
  const auto b = build_quadrature(3, 64, QuadratureScheme::monte_carlo, 17);
  const auto c = build_quadrature(3, 64, QuadratureScheme::monte_carlo, 18);
  EXPECT_EQ((a.nodes - b.nodes).norm(), 0.0);
  EXPECT_GT((a.nodes - c.nodes).norm(), 0.0);
}

TEST(Quadrature, Errors) {
  try {
    build_quadrature(3, 16, QuadratureScheme::grid);
    FAIL() << "expected unsupported-scheme";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_scheme);
  }
  EXPECT_THROW(build_quadrature(1, 7, QuadratureScheme::grid), Error);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  std::vector<double> t, w;
  gauss_legendre(10, t, w);
  for (int deg = 0; deg < 20; ++deg) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += w[i] * std::pow(t[i], deg);
    const double expect = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
    EXPECT_NEAR(s, expect, 1e-14) << "degree " << deg;
  }
}
