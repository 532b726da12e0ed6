#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dirgof/core.hpp"
#include "dirgof/integrate.hpp"
#include "dirgof/special.hpp"

namespace dirgof {

enum class KernelKind { von_mises, custom };

/// Directional kernel L on [0, inf), bounded by M exp(-alpha r).
class DirectionalKernel {
 public:
  using Profile = std::function<double(double)>;

  static DirectionalKernel von_mises() {
    return DirectionalKernel(KernelKind::von_mises, [](double r) { return std::exp(-r); }, 1.0, 1.0);
  }

  /// Custom profile with a declared decay bound; admissibility is spot
  /// checked on a log grid of r.
  static DirectionalKernel custom(Profile profile, double bound_m, double decay_alpha) {
    DirectionalKernel k(KernelKind::custom, std::move(profile), bound_m, decay_alpha);
    k.check_admissible();
    return k;
  }

  double operator()(double r) const { return profile_(r); }

  KernelKind kind() const { return kind_; }
  std::string name() const { return kind_ == KernelKind::von_mises ? "von-mises" : "custom"; }
  double bound_m() const { return bound_m_; }
  double decay_alpha() const { return decay_alpha_; }

  /// Same shape scaled by c > 0 (the estimator weights do not change).
  DirectionalKernel scaled(double c) const {
    require(c > 0.0, ErrorCode::invalid_argument, "kernel scale must be positive");
    Profile base = profile_;
    return custom([base, c](double r) { return c * base(r); }, c * bound_m_, decay_alpha_);
  }

 private:
  DirectionalKernel(KernelKind kind, Profile profile, double m, double alpha)
      : kind_(kind), profile_(std::move(profile)), bound_m_(m), decay_alpha_(alpha) {}

  void check_admissible() const {
    require(bound_m_ > 0.0 && decay_alpha_ > 0.0, ErrorCode::inadmissible_kernel,
            "decay bound needs M > 0 and alpha > 0");
    std::vector<double> grid{0.0};
    for (int i = 0; i <= 240; ++i) grid.push_back(std::pow(10.0, -6.0 + i * 0.0375));
    for (double r : grid) {
      const double v = profile_(r);
      require(std::isfinite(v) && v >= 0.0, ErrorCode::inadmissible_kernel,
              "kernel must be finite and nonnegative (r = " + std::to_string(r) + ")");
      require(v <= bound_m_ * std::exp(-decay_alpha_ * r) * (1.0 + 1e-12) + 1e-300,
              ErrorCode::inadmissible_kernel,
              "kernel exceeds M exp(-alpha r) at r = " + std::to_string(r));
    }
    require(profile_(0.0) > 0.0, ErrorCode::inadmissible_kernel, "kernel must be positive at 0");
  }

  KernelKind kind_;
  Profile profile_;
  double bound_m_;
  double decay_alpha_;
};

struct KernelConstants {
  int q = 1;
  double lambda_q = 0.0;       ///< lambda_q(L)
  double b_q = 0.0;            ///< b_q(L)
  double lambda_q_Lsq = 0.0;   ///< lambda_q(L^2)

  /// lambda_q(L^2) lambda_q(L)^{-2}, the squared-kernel factor of the variance.
  double variance_factor() const { return lambda_q_Lsq / (lambda_q * lambda_q); }
};

namespace detail {

/// int_0^inf g(r) r^{power} dr, computed in s = sqrt(r).
template <class G>
double radial_moment(G&& g, double power, QuadratureTolerance tol = {}) {
  // r = s^2: r^power dr = 2 s^{2 power + 1} ds.
  return integrate_half_line(
      [&](double s) { return 2.0 * std::pow(s, 2.0 * power + 1.0) * g(s * s); },
      tol);
}

}  // namespace detail

/// lambda_q(L), lambda_q(L^2) and b_q(L) by adaptive quadrature.
inline KernelConstants kernel_constants(const DirectionalKernel& kernel, int q) {
  require(q >= 1, ErrorCode::invalid_argument, "q must be >= 1");
  const double half = 0.5 * q;
  const double lead = std::pow(2.0, half - 1.0) * surface_area(q - 1);
  const double m_lo = detail::radial_moment(kernel, half - 1.0);
  const double m_hi = detail::radial_moment(kernel, half);
  const double m_sq = detail::radial_moment([&](double r) { const double v = kernel(r); return v * v; },
                                            half - 1.0);
  KernelConstants c;
  c.q = q;
  c.lambda_q = lead * m_lo;
  c.lambda_q_Lsq = lead * m_sq;
  c.b_q = m_hi / m_lo;
  return c;
}

/// c_{h,q}(L): the factor making c L((1 - x^T y) / h^2) integrate to one over y.
/// Evaluated as 1 / (omega_{q-1} int_0^pi L((1 - cos psi) / h^2) sin^{q-1}(psi) dpsi).
inline double normalizing_constant(const DirectionalKernel& kernel, int q, double h) {
  require(q >= 1, ErrorCode::invalid_argument, "q must be >= 1");
  require(h > 0.0, ErrorCode::invalid_argument, "bandwidth must be positive");
  const double inv_h2 = 1.0 / (h * h);
  auto integrand = [&](double psi) {
    return kernel((1.0 - std::cos(psi)) * inv_h2) * std::pow(std::sin(psi), q - 1);
  };
  std::vector<double> breaks;
  for (double k : {1.0, 4.0, 16.0}) breaks.push_back(k * h);
  QuadratureTolerance tol;
  tol.abs_tol = 1e-300;
  tol.rel_tol = 1e-9;
  const double integral = integrate_pieces(integrand, 0.0, std::numbers::pi, breaks, tol);
  return 1.0 / (surface_area(q - 1) * integral);
}

/// Closed form of c_{h,q} for the von Mises kernel: the vMF(kappa = 1/h^2)
/// normalizer times exp(kappa).
inline double von_mises_normalizing_constant(int q, double h) {
  const double kappa = 1.0 / (h * h);
  const double nu = 0.5 * (q - 1);
  const double log_inv = 0.5 * (q + 1) * std::log(2.0 * std::numbers::pi) +
                         log_scaled_bessel_i(nu, kappa) - nu * std::log(kappa);
  return std::exp(-log_inv);
}

/// Scaled kernel L_h(x, y) = c_{h,q} L((1 - x^T y) / h^2) with its constant cached.
struct BandwidthKernel {
  DirectionalKernel kernel;
  int q = 1;
  double h = 1.0;
  double c = 1.0;

  BandwidthKernel(DirectionalKernel k, int q_, double h_)
      : kernel(std::move(k)), q(q_), h(h_), c(normalizing_constant(kernel, q_, h_)) {}

  double raw(double inner) const { return kernel((1.0 - inner) / (h * h)); }
  double operator()(double inner) const { return c * raw(inner); }
};

namespace detail {

/// phi_q(r, rho) with r = s^2, rho = u^2.
inline double phi_q(const DirectionalKernel& kernel, int q, double s, double u) {
  const double base = s * s + u * u;
  if (q == 1) {
    return kernel((s - u) * (s - u)) + kernel((s + u) * (s + u));
  }
  // theta = cos(psi): (1 - theta^2)^{(q-3)/2} dtheta = sin^{q-2}(psi) dpsi.
  auto f = [&](double psi) {
    const double arg = std::max(0.0, base - 2.0 * std::cos(psi) * s * u);
    return std::pow(std::sin(psi), q - 2) * kernel(arg);
  };
  QuadratureTolerance tol;
  tol.abs_tol = 1e-14;
  tol.rel_tol = 1e-10;
  return integrate_interval(f, 0.0, std::numbers::pi, tol);
}

inline double gamma_q(int q) {
  if (q == 1) return std::pow(2.0, -0.5);
  const double w1 = surface_area(q - 1);
  const double w2 = surface_area(q - 2);
  return w1 * w2 * w2 * std::pow(2.0, 1.5 * q - 3.0);
}

}  // namespace detail

/// Kernel part of nu^2: gamma_q lambda_q(L)^{-4} int r^{q/2-1} [int rho^{q/2-1} L(rho) phi_q d rho]^2 dr.
inline double nu_squared_factor(const DirectionalKernel& kernel, int q) {
  require(q >= 1, ErrorCode::invalid_argument, "q must be >= 1");
  const KernelConstants kc = kernel_constants(kernel, q);
  QuadratureTolerance inner_tol;
  inner_tol.abs_tol = 1e-13;
  inner_tol.rel_tol = 1e-9;
  auto inner = [&](double s) {
    return integrate_half_line(
        [&](double u) {
          if (u == 0.0 && q > 1) return 0.0;
          return 2.0 * std::pow(u, q - 1) * kernel(u * u) * detail::phi_q(kernel, q, s, u);
        },
        inner_tol);
  };
  QuadratureTolerance outer_tol;
  outer_tol.abs_tol = 1e-12;
  outer_tol.rel_tol = 1e-8;
  const double outer = integrate_half_line(
      [&](double s) {
        if (s == 0.0 && q > 1) return 0.0;
        const double v = inner(s);
        return 2.0 * std::pow(s, q - 1) * v * v;
      },
      outer_tol);
  return detail::gamma_q(q) * outer / std::pow(kc.lambda_q, 4);
}

/// nu^2 = (int sigma^4 w^2 d omega) times the kernel factor.
inline double nu_squared(const DirectionalKernel& kernel, int q, double sigma4_w2_integral) {
  require(sigma4_w2_integral >= 0.0, ErrorCode::invalid_argument,
          "sigma^4 w^2 integral must be nonnegative");
  return sigma4_w2_integral * nu_squared_factor(kernel, q);
}

}  // namespace dirgof
