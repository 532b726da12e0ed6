#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "dirgof/core.hpp"
#include "dirgof/integrate.hpp"
#include "dirgof/special.hpp"

namespace dirgof {

/// Unit vector in R^{q+1}. Construction normalizes the input.
class SpherePoint {
 public:
  SpherePoint() = default;

  explicit SpherePoint(Vector coords) : coords_(std::move(coords)) {
    require(coords_.size() >= 2, ErrorCode::invalid_argument, "sphere points need q >= 1");
    const double nrm = coords_.norm();
    require(std::isfinite(nrm) && nrm > 0.0, ErrorCode::invalid_argument,
            "cannot normalize a zero or non-finite vector");
    coords_ /= nrm;
  }

  SpherePoint(std::initializer_list<double> values)
      : SpherePoint(Eigen::Map<const Vector>(values.begin(), static_cast<Eigen::Index>(values.size()))) {}

  int q() const { return static_cast<int>(coords_.size()) - 1; }
  Eigen::Index ambient_dim() const { return coords_.size(); }
  const Vector& coords() const { return coords_; }
  double operator[](Eigen::Index i) const { return coords_[i]; }

 private:
  Vector coords_;
};

/// Semiorthogonal (q+1) x q completion B_x of a point x.
struct ProjectionBasis {
  SpherePoint base_point;
  Matrix columns;
};

/// Gram-Schmidt completion of x against the canonical axes in index order,
/// skipping the axis of the largest |x_i|.
inline ProjectionBasis projection_basis(const SpherePoint& x) {
  const Eigen::Index d = x.ambient_dim();
  Eigen::Index pivot = 0;
  x.coords().cwiseAbs().maxCoeff(&pivot);

  Matrix cols(d, d - 1);
  Eigen::Index filled = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j == pivot) continue;
    Vector v = Vector::Unit(d, j);
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      v -= x.coords().dot(v) * x.coords();
      for (Eigen::Index k = 0; k < filled; ++k) v -= cols.col(k).dot(v) * cols.col(k);
    }
    cols.col(filled++) = v.normalized();
  }
  return {x, std::move(cols)};
}

/// t x + sqrt(1 - t^2) B_x xi.
inline SpherePoint tangent_normal_point(const ProjectionBasis& basis, double t, const Vector& xi) {
  require(std::abs(t) <= 1.0, ErrorCode::invalid_argument, "|t| must be <= 1");
  require(xi.size() == basis.columns.cols(), ErrorCode::dimension_mismatch,
          "xi must live in R^q");
  return SpherePoint(t * basis.base_point.coords() +
                     std::sqrt(std::max(0.0, 1.0 - t * t)) * (basis.columns * xi));
}

inline SpherePoint tangent_normal_point(const SpherePoint& x, double t, const Vector& xi) {
  return tangent_normal_point(projection_basis(x), t, xi);
}

/// n iid uniform points on the q-sphere, one per row.
template <class Urbg>
PointMatrix sample_uniform(int q, Eigen::Index n, Urbg& rng) {
  require(q >= 1 && n >= 1, ErrorCode::invalid_argument, "sample_uniform needs q >= 1, n >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  PointMatrix out(n, q + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double nrm = 0.0;
    do {
      for (int j = 0; j <= q; ++j) out(i, j) = gauss(rng);
      nrm = out.row(i).norm();
    } while (nrm < 1e-300);
    out.row(i) /= nrm;
  }
  return out;
}

/// Uniform direction on the (q-1)-sphere living in R^q (a random sign when q = 1).
template <class Urbg>
Vector uniform_direction(int dim, Urbg& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  double nrm = 0.0;
  do {
    for (int j = 0; j < dim; ++j) v[j] = gauss(rng);
    nrm = v.norm();
  } while (nrm < 1e-300);
  return v / nrm;
}

/// Paired observations (X_i, Y_i) with X_i on the q-sphere.
struct DirLinSample {
  PointMatrix x;
  Vector y;

  DirLinSample() = default;
  DirLinSample(PointMatrix points, Vector response) : x(std::move(points)), y(std::move(response)) {
    require(x.rows() == y.size(), ErrorCode::length_mismatch,
            "predictor and response counts differ");
    require(x.cols() >= 2, ErrorCode::invalid_argument, "predictors need q >= 1");
  }

  int q() const { return static_cast<int>(x.cols()) - 1; }
  Eigen::Index size() const { return y.size(); }
};

enum class QuadratureScheme { grid, monte_carlo };

struct SphereQuadrature {
  int q = 1;
  QuadratureScheme scheme = QuadratureScheme::grid;
  PointMatrix nodes;
  Vector weights;

  Eigen::Index node_count() const { return nodes.rows(); }
};

struct IntegralEstimate {
  double value = 0.0;
  /// Variance of the estimate; zero for deterministic grids.
  double variance = 0.0;
};

/// Integration rule over the q-sphere.
///   q = 1, grid: `resolution` equispaced angles.
///   q = 2, grid: Gauss-Legendre of order `resolution` in t = x_3 times
///                `resolution` azimuths, laid out with tangent-normal coordinates
///                about the north pole.
///   monte carlo: `resolution` uniform nodes of weight omega_q / N.
inline SphereQuadrature build_quadrature(int q, int resolution, QuadratureScheme scheme,
                                         std::uint64_t seed = 0) {
  require(q >= 1, ErrorCode::invalid_argument, "quadrature needs q >= 1");
  require(resolution >= 8, ErrorCode::invalid_argument, "quadrature resolution must be >= 8");
  SphereQuadrature quad;
  quad.q = q;
  quad.scheme = scheme;
  const double area = surface_area(q);

  if (scheme == QuadratureScheme::monte_carlo) {
    Rng rng = substream(seed, {0x51a7u});
    quad.nodes = sample_uniform(q, resolution, rng);
    quad.weights = Vector::Constant(resolution, area / resolution);
    return quad;
  }

  require(q <= 2, ErrorCode::unsupported_scheme, "grid quadrature is only available for q = 1, 2");
  if (q == 1) {
    quad.nodes.resize(resolution, 2);
    for (int k = 0; k < resolution; ++k) {
      const double a = 2.0 * std::numbers::pi * k / resolution;
      quad.nodes(k, 0) = std::cos(a);
      quad.nodes(k, 1) = std::sin(a);
    }
    quad.weights = Vector::Constant(resolution, area / resolution);
    return quad;
  }

  std::vector<double> t, wt;
  gauss_legendre(resolution, t, wt);
  const ProjectionBasis pole = projection_basis(SpherePoint{0.0, 0.0, 1.0});
  const Eigen::Index count = static_cast<Eigen::Index>(resolution) * resolution;
  quad.nodes.resize(count, 3);
  quad.weights.resize(count);
  const double dphi = 2.0 * std::numbers::pi / resolution;
  Eigen::Index idx = 0;
  for (int j = 0; j < resolution; ++j) {
    for (int k = 0; k < resolution; ++k) {
      const double phi = dphi * k;
      const Vector xi = (Vector(2) << std::cos(phi), std::sin(phi)).finished();
      quad.nodes.row(idx) = tangent_normal_point(pole, t[j], xi).coords().transpose();
      // (1 - t^2)^{q/2 - 1} = 1 for q = 2.
      quad.weights[idx] = wt[j] * dphi;
      ++idx;
    }
  }
  return quad;
}

template <class F>
IntegralEstimate integrate(const SphereQuadrature& quad, F&& f) {
  const Eigen::Index n = quad.node_count();
  Vector values(n);
  for (Eigen::Index k = 0; k < n; ++k) values[k] = f(quad.nodes.row(k).transpose().eval());
  IntegralEstimate out;
  out.value = quad.weights.dot(values);
  if (quad.scheme == QuadratureScheme::monte_carlo && n > 1) {
    const double area = quad.weights.sum();
    const double mean = values.mean();
    const double var = (values.array() - mean).square().sum() / (n - 1);
    out.variance = area * area * var / n;
  }
  return out;
}

}  // namespace dirgof
