#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dirgof/core.hpp"
#include "dirgof/density.hpp"
#include "dirgof/kernel.hpp"
#include "dirgof/locreg.hpp"
#include "dirgof/parallel.hpp"
#include "dirgof/parfit.hpp"
#include "dirgof/sphere.hpp"

namespace dirgof {

using WeightFunction = std::function<double(const Vector&)>;

enum class NullHypothesis { simple, composite };

struct GofConfig {
  LocalFitConfig local;
  /// Unset: grid for q <= 2, Monte Carlo otherwise.
  std::optional<QuadratureScheme> scheme;
  /// 0 picks a default from q and h.
  int quad_resolution = 0;
  /// Empty means w = 1.
  WeightFunction weight;
  int B = 200;
  std::uint64_t seed = 0;
  NullHypothesis hypothesis = NullHypothesis::composite;
  /// Required for the simple null.
  Vector theta0;
  /// Threads for bootstrap refits.
  int workers = 1;

  void validate() const {
    local.validate();
    require(B >= 1, ErrorCode::invalid_argument, "bootstrap size B must be >= 1");
    require(quad_resolution == 0 || quad_resolution >= 8, ErrorCode::invalid_argument,
            "quadrature resolution must be 0 (auto) or >= 8");
  }
};

inline QuadratureScheme resolved_scheme(const GofConfig& cfg, int q) {
  if (cfg.scheme) return *cfg.scheme;
  return q <= 2 ? QuadratureScheme::grid : QuadratureScheme::monte_carlo;
}

/// Default node count: 256 angles (q = 1), 48 x 48 (q = 2), 2e4 Monte Carlo
/// nodes otherwise, refined so the node spacing stays below about h / 4.
inline int default_quad_resolution(int q, double h, QuadratureScheme scheme) {
  if (scheme == QuadratureScheme::monte_carlo) return 20000;
  const double pi = std::numbers::pi;
  if (q == 1) return std::max(256, static_cast<int>(std::ceil(8.0 * pi / h)));
  return std::max(48, static_cast<int>(std::ceil(4.0 * pi / h)));
}

inline SphereQuadrature make_quadrature(const GofConfig& cfg, int q) {
  const QuadratureScheme scheme = resolved_scheme(cfg, q);
  const int res = cfg.quad_resolution > 0 ? cfg.quad_resolution
                                          : default_quad_resolution(q, cfg.local.h, scheme);
  return build_quadrature(q, res, scheme, cfg.seed);
}

/// Per-invocation cache: weight rows W_n^p(x_k, X_i), f_hat_h(x_k), w(x_k), and
/// d_k = quadrature weight * f_hat * w.
struct GofCache {
  SphereQuadrature quad;
  Matrix weights;  ///< K x n
  Vector f_hat;
  Vector w;
  Vector d;
  int regularized_nodes = 0;
  int empty_nodes = 0;
};

inline GofCache build_cache(const PointMatrix& x, const GofConfig& cfg) {
  cfg.validate();
  const int q = static_cast<int>(x.cols()) - 1;
  const Eigen::Index n = x.rows();
  require(n >= 1, ErrorCode::invalid_argument, "need at least one observation");
  GofCache cache;
  cache.quad = make_quadrature(cfg, q);
  const Eigen::Index k_count = cache.quad.node_count();
  cache.weights = Matrix::Zero(k_count, n);
  cache.f_hat.resize(k_count);
  cache.w.resize(k_count);

  const double c = normalizing_constant(cfg.local.kernel, q, cfg.local.h);
  std::vector<Eigen::Index> active;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const Vector node = cache.quad.nodes.row(k).transpose();
    const Vector kvals = detail::kernel_values(node, x, cfg.local);
    cache.f_hat[k] = c * kvals.sum() / static_cast<double>(n);
    cache.w[k] = cfg.weight ? cfg.weight(node) : 1.0;

    // Only points with nonzero kernel weight enter the local fit.
    active.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (kvals[i] > 0.0) active.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(active.size());
    PointMatrix sub(m, x.cols());
    Vector sub_k(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      sub.row(j) = x.row(active[j]);
      sub_k[j] = kvals[active[j]];
    }
    const LocalWeights lw = local_weights_from_kernel(node, sub, sub_k, cfg.local.p);
    for (Eigen::Index j = 0; j < m; ++j) cache.weights(k, active[j]) = lw.weights[j];
    if (lw.status == FitStatus::regularized) ++cache.regularized_nodes;
    if (lw.status == FitStatus::empty) ++cache.empty_nodes;
  }
  cache.d = cache.quad.weights.cwiseProduct(cache.f_hat).cwiseProduct(cache.w);
  return cache;
}

/// T_n = sum_k d_k (sum_i W(x_k, X_i) e_i)^2 in residual form.
inline double statistic(const GofCache& cache, const Vector& residuals) {
  require(residuals.size() == cache.weights.cols(), ErrorCode::length_mismatch,
          "residual count does not match the cached design");
  const Vector smooth = cache.weights * residuals;
  return cache.d.dot(smooth.cwiseAbs2());
}

/// Statistics for each column of a residual matrix (n x B).
inline Vector statistics(const GofCache& cache, const Matrix& residuals) {
  require(residuals.rows() == cache.weights.cols(), ErrorCode::length_mismatch,
          "residual count does not match the cached design");
  const Matrix smooth = cache.weights * residuals;
  return (smooth.array().square().colwise() * cache.d.array()).colwise().sum().transpose();
}

inline double statistic(const DirLinSample& sample, const ParametricFamily& family,
                        const Vector& theta_hat, const GofConfig& cfg) {
  const GofCache cache = build_cache(sample.x, cfg);
  return statistic(cache, sample.y - predict_batch(family, theta_hat, sample.x));
}

/// T_n from its definition: integrate (m_hat(x) - L m_theta(x))^2 f_hat(x) w(x)
/// with both smooths computed by fresh local fits at every node.
inline double statistic_direct(const DirLinSample& sample, const ParametricFamily& family,
                               const Vector& theta_hat, const GofConfig& cfg) {
  cfg.validate();
  const int q = sample.q();
  const SphereQuadrature quad = make_quadrature(cfg, q);
  const DirLinSample model_sample(sample.x, predict_batch(family, theta_hat, sample.x));
  const BandwidthKernel bk(cfg.local.kernel, q, cfg.local.h);
  double total = 0.0;
  for (Eigen::Index k = 0; k < quad.node_count(); ++k) {
    const SpherePoint node(quad.nodes.row(k).transpose().eval());
    const double w = cfg.weight ? cfg.weight(node.coords()) : 1.0;
    const double m_hat = estimate(node, sample, cfg.local).beta0;
    const double m_smooth = estimate(node, model_sample, cfg.local).beta0;
    const double diff = m_hat - m_smooth;
    total += quad.weights[k] * diff * diff * kde(node.coords(), sample.x, bk) * w;
  }
  return total;
}

inline constexpr double golden_low = (1.0 - 2.2360679774997896964) / 2.0;
inline constexpr double golden_high = (1.0 + 2.2360679774997896964) / 2.0;
/// P(V = golden_low) = (5 + sqrt 5) / 10.
inline constexpr double golden_low_prob = (5.0 + 2.2360679774997896964) / 10.0;

/// iid two-point multipliers with mean 0 and variance 1.
template <class Urbg>
Vector golden_section_draws(Eigen::Index n, Urbg& rng) {
  require(n >= 1, ErrorCode::invalid_argument, "need n >= 1 multipliers");
  std::bernoulli_distribution low(golden_low_prob);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = low(rng) ? golden_low : golden_high;
  return v;
}

/// n x B multipliers; column b comes from the substream (seed, stream, b).
inline Matrix golden_section_matrix(Eigen::Index n, int B, std::uint64_t seed, std::uint64_t stream = 0) {
  Matrix v(n, B);
  for (int b = 0; b < B; ++b) {
    Rng rng = substream(seed, {stream, static_cast<std::uint64_t>(b)});
    v.col(b) = golden_section_draws(n, rng);
  }
  return v;
}

struct GofResult {
  double statistic = 0.0;
  Vector boot;
  double p_value = 0.0;
  Vector theta_hat;
  int B = 0;
  int regularized_nodes = 0;
  int empty_nodes = 0;
  int failed_refits = 0;
  bool fit_converged = true;
  Eigen::Index quad_nodes = 0;
};

/// Fraction of bootstrap statistics at or above T_n.
inline double bootstrap_p_value(double t, const Vector& boot) {
  return static_cast<double>((boot.array() >= t).count()) / static_cast<double>(boot.size());
}

namespace detail {

inline ThetaEstimate initial_fit(const DirLinSample& sample, const ParametricFamily& family,
                                 const GofConfig& cfg) {
  if (cfg.hypothesis == NullHypothesis::simple) {
    require(cfg.theta0.size() == family.dim_theta(), ErrorCode::invalid_argument,
            "the simple null needs theta0 of length " + std::to_string(family.dim_theta()));
    return fixed_theta(family, sample, cfg.theta0);
  }
  return fit(family, sample);
}

}  // namespace detail

/// Wild bootstrap test of H0: m in the family, with caller-supplied multipliers
/// (n x B). The cache must belong to sample.x and cfg.
inline GofResult bootstrap_test(const DirLinSample& sample, const ParametricFamily& family,
                                const GofConfig& cfg, const GofCache& cache,
                                const Matrix& multipliers) {
  cfg.validate();
  const Eigen::Index n = sample.size();
  require(multipliers.rows() == n && multipliers.cols() == cfg.B, ErrorCode::dimension_mismatch,
          "multiplier matrix must be n x B");

  // (i) parametric fit and residuals.
  const ThetaEstimate est = detail::initial_fit(sample, family, cfg);
  GofResult out;
  out.theta_hat = est.theta;
  out.fit_converged = est.converged;
  out.B = cfg.B;
  out.regularized_nodes = cache.regularized_nodes;
  out.empty_nodes = cache.empty_nodes;
  out.quad_nodes = cache.quad.node_count();

  // (ii) observed statistic.
  out.statistic = statistic(cache, est.residuals);

  // (iii) bootstrap residuals; the simple null keeps theta0 fixed.
  Matrix boot_resid(n, cfg.B);
  if (cfg.hypothesis == NullHypothesis::simple) {
    boot_resid = multipliers.array().colwise() * est.residuals.array();
  } else {
    const Vector fitted = sample.y - est.residuals;
    std::vector<char> failed(static_cast<std::size_t>(cfg.B), 0);
    parallel_for(static_cast<std::size_t>(cfg.B), cfg.workers, [&](std::size_t b) {
      const auto bi = static_cast<Eigen::Index>(b);
      DirLinSample star(sample.x, fitted + est.residuals.cwiseProduct(multipliers.col(bi)));
      const ThetaEstimate refit = family.linear_in_theta() ? fit(family, star)
                                                           : fit(family, star, est.theta);
      boot_resid.col(bi) = refit.residuals;
      failed[b] = refit.converged ? 0 : 1;
    });
    for (char f : failed) out.failed_refits += f;
    require(out.failed_refits * 20 <= cfg.B, ErrorCode::no_convergence,
            std::to_string(out.failed_refits) + " of " + std::to_string(cfg.B) +
                " bootstrap refits did not converge");
  }
  out.boot = statistics(cache, boot_resid);

  // (iv) p-value.
  out.p_value = bootstrap_p_value(out.statistic, out.boot);
  return out;
}

inline GofResult bootstrap_test(const DirLinSample& sample, const ParametricFamily& family,
                                const GofConfig& cfg) {
  const GofCache cache = build_cache(sample.x, cfg);
  return bootstrap_test(sample, family, cfg, cache,
                        golden_section_matrix(sample.size(), cfg.B, cfg.seed));
}

/// Bootstrap statistic b recomputed without the cache: rebuild Y*, refit,
/// and integrate the direct form.
inline double bootstrap_statistic_from_scratch(const DirLinSample& sample,
                                               const ParametricFamily& family,
                                               const GofConfig& cfg, const Vector& multipliers) {
  const ThetaEstimate est = detail::initial_fit(sample, family, cfg);
  const Vector fitted = sample.y - est.residuals;
  DirLinSample star(sample.x, fitted + est.residuals.cwiseProduct(multipliers));
  Vector theta_star = est.theta;
  if (cfg.hypothesis == NullHypothesis::composite) {
    theta_star = (family.linear_in_theta() ? fit(family, star) : fit(family, star, est.theta)).theta;
  }
  return statistic_direct(star, family, theta_star, cfg);
}

struct CenterScale {
  double center = 0.0;
  double scale = 1.0;
};

/// Centering lambda_q(L^2) lambda_q(L)^{-2} (n h^q)^{-1} int sigma^2 w and
/// scale sqrt(2 nu^2) of the limiting normal law of n h^{q/2} (T_n - center).
inline CenterScale asymptotic_center_scale(const LocalFitConfig& cfg, int q, double sigma2_integral,
                                           double nu2, double n) {
  cfg.validate();
  require(sigma2_integral > 0.0 && nu2 > 0.0 && n > 0.0, ErrorCode::invalid_argument,
          "center/scale inputs must be positive");
  const KernelConstants kc = kernel_constants(cfg.kernel, q);
  CenterScale cs;
  cs.center = kc.variance_factor() * sigma2_integral / (n * std::pow(cfg.h, q));
  cs.scale = std::sqrt(2.0 * nu2);
  return cs;
}

inline double standardized_statistic(double t, const CenterScale& cs, double n, double h, int q) {
  return n * std::pow(h, 0.5 * q) * (t - cs.center) / cs.scale;
}

/// Plug-in estimates of int sigma^2 w and int sigma^4 w^2: squared residuals
/// smoothed with the cached weights and integrated on the same nodes.
struct VarianceIntegrals {
  double sigma2_w = 0.0;
  double sigma4_w2 = 0.0;
};

inline VarianceIntegrals variance_integrals(const GofCache& cache, const Vector& residuals) {
  const Vector s2 = cache.weights * residuals.cwiseAbs2();
  VarianceIntegrals out;
  out.sigma2_w = cache.quad.weights.dot(s2.cwiseProduct(cache.w));
  out.sigma4_w2 = cache.quad.weights.dot(s2.cwiseAbs2().cwiseProduct(cache.w.cwiseAbs2()));
  return out;
}

}  // namespace dirgof
