#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "dirgof/core.hpp"
#include "dirgof/kernel.hpp"
#include "dirgof/sphere.hpp"

namespace dirgof {

/// Degree p (0 = local constant, 1 = projected local linear), bandwidth and kernel.
struct LocalFitConfig {
  int p = 1;
  double h = 0.5;
  DirectionalKernel kernel = DirectionalKernel::von_mises();

  void validate() const {
    require(p == 0 || p == 1, ErrorCode::invalid_argument, "degree p must be 0 or 1");
    require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument, "bandwidth must be positive");
  }
};

enum class FitStatus {
  ok,
  /// Rank-deficient design; a ridge of 1e-10 trace(Gram)/(q+1) was added.
  regularized,
  /// Every kernel weight underflowed; the weights are all zero.
  empty,
};

struct LocalWeights {
  Vector weights;
  FitStatus status = FitStatus::ok;
};

struct LocalFit {
  double beta0 = 0.0;
  Vector beta1;
  Vector effective_weights;
  FitStatus status = FitStatus::ok;
};

namespace detail {

inline constexpr double kernel_floor = 1e-300;
inline constexpr double rank_tol = 1e-10;
inline constexpr double ridge_scale = 1e-10;

/// Raw kernel values L((1 - x^T X_i) / h^2), clamped below 1e-300.
inline Vector kernel_values(const Vector& x, const PointMatrix& points, const LocalFitConfig& cfg) {
  require(points.cols() == x.size(), ErrorCode::dimension_mismatch,
          "evaluation point and predictors have different dimension");
  const double inv_h2 = 1.0 / (cfg.h * cfg.h);
  const Vector inner = points * x;
  Vector k(points.rows());
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    const double v = cfg.kernel((1.0 - inner[i]) * inv_h2);
    k[i] = v < kernel_floor ? 0.0 : v;
  }
  return k;
}

/// Local design [1, (X_i - x)^T B_x] scaled row-wise by sqrt(k_i).
inline Matrix scaled_design(const Vector& x, const Matrix& basis, const PointMatrix& points,
                            const Vector& sqrt_k) {
  const Eigen::Index n = points.rows();
  const Eigen::Index q = basis.cols();
  Matrix a(n, q + 1);
  a.col(0) = sqrt_k;
  a.rightCols(q) = ((points.rowwise() - x.transpose()) * basis).array().colwise() * sqrt_k.array();
  return a;
}

struct WlsFactor {
  Eigen::HouseholderQR<Matrix> qr;
  Eigen::Index n = 0;
  bool regularized = false;
};

/// QR of sqrt(W) X, augmented with a ridge block when the design is rank deficient.
inline WlsFactor factor_wls(const Matrix& a) {
  WlsFactor f;
  f.n = a.rows();
  const Eigen::Index cols = a.cols();
  bool deficient = a.rows() < cols;
  if (!deficient) {
    f.qr.compute(a);
    const auto diag = f.qr.matrixQR().diagonal().cwiseAbs();
    deficient = !(diag.minCoeff() > rank_tol * diag.maxCoeff());
  }
  if (deficient) {
    const double ridge = ridge_scale * a.squaredNorm() / static_cast<double>(cols);
    Matrix aug(a.rows() + cols, cols);
    aug.topRows(a.rows()) = a;
    aug.bottomRows(cols) = std::sqrt(ridge) * Matrix::Identity(cols, cols);
    f.qr.compute(aug);
    f.regularized = true;
  }
  return f;
}

/// e_1^T (X^T W X)^{-1} X^T W = e_1^T R^{-1} Q_top^T sqrt(W).
inline Vector first_row_weights(const WlsFactor& f, const Vector& sqrt_k) {
  const Eigen::Index cols = f.qr.matrixQR().cols();
  const auto r = f.qr.matrixQR().topLeftCorner(cols, cols).template triangularView<Eigen::Upper>();
  Vector z = Vector::Unit(cols, 0);
  r.transpose().solveInPlace(z);
  Vector padded = Vector::Zero(f.qr.rows());
  padded.head(cols) = z;
  const Vector u = f.qr.householderQ() * padded;
  return sqrt_k.cwiseProduct(u.head(f.n));
}

}  // namespace detail

/// Weights from precomputed kernel values (shared with the density estimate).
inline LocalWeights local_weights_from_kernel(const Vector& x, const PointMatrix& points,
                                              const Vector& kvals, int p) {
  const Eigen::Index n = points.rows();
  LocalWeights out;
  const double total = kvals.sum();
  if (!(total > 0.0)) {
    out.weights = Vector::Zero(n);
    out.status = FitStatus::empty;
    return out;
  }
  if (p == 0) {
    out.weights = kvals / total;
    return out;
  }
  const Matrix basis = projection_basis(SpherePoint(x)).columns;
  const Vector sqrt_k = kvals.cwiseSqrt();
  const detail::WlsFactor f = detail::factor_wls(detail::scaled_design(x, basis, points, sqrt_k));
  out.weights = detail::first_row_weights(f, sqrt_k);
  out.status = f.regularized ? FitStatus::regularized : FitStatus::ok;
  return out;
}

/// Smoothing weights W_n^p(x, X_i), i = 1..n.
inline LocalWeights local_weights(const Vector& x, const PointMatrix& points,
                                  const LocalFitConfig& cfg) {
  cfg.validate();
  require(points.rows() >= 1, ErrorCode::invalid_argument, "need at least one predictor");
  return local_weights_from_kernel(x, points, detail::kernel_values(x, points, cfg), cfg.p);
}

inline LocalWeights local_weights(const SpherePoint& x, const PointMatrix& points,
                                  const LocalFitConfig& cfg) {
  return local_weights(x.coords(), points, cfg);
}

/// Local fit at x using a given basis B_x for the projected-linear term.
inline LocalFit estimate_with_basis(const Vector& x, const Matrix& basis, const DirLinSample& sample,
                                    const LocalFitConfig& cfg) {
  cfg.validate();
  require(sample.size() >= 1, ErrorCode::invalid_argument, "need at least one observation");
  const Vector kvals = detail::kernel_values(x, sample.x, cfg);
  LocalFit fit;
  if (!(kvals.sum() > 0.0)) {
    fit.effective_weights = Vector::Zero(sample.size());
    fit.status = FitStatus::empty;
    if (cfg.p == 1) fit.beta1 = Vector::Zero(basis.cols());
    return fit;
  }
  if (cfg.p == 0) {
    fit.effective_weights = kvals / kvals.sum();
    fit.beta0 = fit.effective_weights.dot(sample.y);
    return fit;
  }
  const Vector sqrt_k = kvals.cwiseSqrt();
  const detail::WlsFactor f = detail::factor_wls(detail::scaled_design(x, basis, sample.x, sqrt_k));
  Vector rhs = Vector::Zero(f.qr.rows());
  rhs.head(f.n) = sqrt_k.cwiseProduct(sample.y);
  const Vector beta = f.qr.solve(rhs);
  fit.effective_weights = detail::first_row_weights(f, sqrt_k);
  fit.beta0 = beta[0];
  fit.beta1 = beta.tail(basis.cols());
  fit.status = f.regularized ? FitStatus::regularized : FitStatus::ok;
  return fit;
}

/// Projected local estimator at x; beta0 is m_hat_{h,p}(x).
inline LocalFit estimate(const SpherePoint& x, const DirLinSample& sample, const LocalFitConfig& cfg) {
  require(x.ambient_dim() == sample.x.cols(), ErrorCode::dimension_mismatch,
          "evaluation point and sample dimensions differ");
  return estimate_with_basis(x.coords(), projection_basis(x).columns, sample, cfg);
}

/// Applies precomputed weight rows to function values at the design points.
inline Vector smooth_parametric(const Vector& model_values, const Matrix& weight_rows) {
  require(weight_rows.cols() == model_values.size(), ErrorCode::length_mismatch,
          "weight rows and model values have different lengths");
  return weight_rows * model_values;
}

// Closed-form local linear fits in polar coordinates (q = 1) and spherical
// coordinates (q = 2). Mathematically identical to the generic solve.

/// q = 1: (s_2 t_0 - s_1 t_1) / (s_2 s_0 - s_1^2) with s_j, t_j built from
/// sin(Theta_i - theta).
inline double circular_local_linear(const SpherePoint& x, const DirLinSample& sample,
                                    double h, const DirectionalKernel& kernel) {
  require(x.q() == 1 && sample.q() == 1, ErrorCode::dimension_mismatch, "circular fit needs q = 1");
  const double theta = std::atan2(x[1], x[0]);
  double s[3] = {0, 0, 0};
  double t[2] = {0, 0};
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double ang = std::atan2(sample.x(i, 1), sample.x(i, 0));
    const double lv = kernel((1.0 - std::cos(ang - theta)) / (h * h));
    const double sn = std::sin(ang - theta);
    s[0] += lv;
    s[1] += lv * sn;
    s[2] += lv * sn * sn;
    t[0] += lv * sample.y[i];
    t[1] += lv * sn * sample.y[i];
  }
  return (s[2] * t[0] - s[1] * t[1]) / (s[2] * s[0] - s[1] * s[1]);
}

/// q = 2: ratio of 3x3 cofactor expansions of the s_jk / t_jk moments.
inline double spherical_local_linear(const SpherePoint& x, const DirLinSample& sample,
                                     double h, const DirectionalKernel& kernel) {
  require(x.q() == 2 && sample.q() == 2, ErrorCode::dimension_mismatch, "spherical fit needs q = 2");
  const double phi = std::acos(std::clamp(x[2], -1.0, 1.0));
  const double theta = std::atan2(x[1], x[0]);
  double s00 = 0, s10 = 0, s01 = 0, s20 = 0, s11 = 0, s02 = 0;
  double t00 = 0, t10 = 0, t01 = 0;
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    const double big_phi = std::acos(std::clamp(sample.x(i, 2), -1.0, 1.0));
    const double big_theta = std::atan2(sample.x(i, 1), sample.x(i, 0));
    const double inner = std::sin(phi) * std::sin(big_phi) * std::cos(big_theta - theta) +
                         std::cos(phi) * std::cos(big_phi);
    const double lv = kernel((1.0 - inner) / (h * h));
    const double a = std::sin(big_phi) * std::sin(big_theta - theta);
    const double b = -std::cos(phi) * std::sin(big_phi) * std::cos(big_theta - theta) +
                     std::sin(phi) * std::cos(big_phi);
    const double y = sample.y[i];
    s00 += lv;
    s10 += lv * a;
    s01 += lv * b;
    s20 += lv * a * a;
    s11 += lv * a * b;
    s02 += lv * b * b;
    t00 += lv * y;
    t10 += lv * a * y;
    t01 += lv * b * y;
  }
  const double c0 = s20 * s02 - s11 * s11;
  const double c1 = s10 * s02 - s01 * s11;
  const double c2 = s10 * s11 - s01 * s20;
  return (c0 * t00 - c1 * t10 + c2 * t01) / (c0 * s00 - c1 * s10 + c2 * s01);
}

/// Equivalent-kernel approximation sum_i L*_h(x, X_i) Y_i, with f_hat(x) in
/// place of the design density.
inline double equivalent_kernel_estimate(const SpherePoint& x, const DirLinSample& sample,
                                         const LocalFitConfig& cfg, double f_hat_at_x) {
  cfg.validate();
  require(f_hat_at_x > 0.0, ErrorCode::invalid_argument, "density estimate must be positive");
  const int q = sample.q();
  const KernelConstants kc = kernel_constants(cfg.kernel, q);
  const Vector kvals = detail::kernel_values(x.coords(), sample.x, cfg);
  const double denom = static_cast<double>(sample.size()) * std::pow(cfg.h, q) * kc.lambda_q * f_hat_at_x;
  return kvals.dot(sample.y) / denom;
}

struct BiasVariance {
  double bias = 0.0;
  double variance = 0.0;
};

/// Leading conditional bias and variance terms of m_hat_{h,p}(x).
inline BiasVariance asymptotic_bias_variance(double f, double grad_f_dot_grad_m, double trace_hm,
                                             double sigma2, const LocalFitConfig& cfg, int q,
                                             double n) {
  cfg.validate();
  require(f > 0.0 && sigma2 > 0.0, ErrorCode::invalid_argument, "f and sigma^2 must be positive");
  const KernelConstants kc = kernel_constants(cfg.kernel, q);
  const double b_p = cfg.p == 0 ? 2.0 * grad_f_dot_grad_m / f + trace_hm : trace_hm;
  BiasVariance out;
  out.bias = kc.b_q / q * b_p * cfg.h * cfg.h;
  out.variance = kc.variance_factor() * sigma2 / (n * std::pow(cfg.h, q) * f);
  return out;
}

}  // namespace dirgof
