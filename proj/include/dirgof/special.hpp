#pragma once

#include <cmath>
#include <numbers>

namespace dirgof {

/// Surface area of the unit q-sphere in R^{q+1}.
inline double surface_area(int q) {
  const double a = 0.5 * (q + 1);
  return 2.0 * std::pow(std::numbers::pi, a) / std::tgamma(a);
}

inline double log_surface_area(int q) {
  const double a = 0.5 * (q + 1);
  return std::log(2.0) + a * std::log(std::numbers::pi) - std::lgamma(a);
}

/// log(e^{-x} I_nu(x)) for x >= 0. Switches to the large-argument series
/// once the unscaled Bessel function would overflow.
inline double log_scaled_bessel_i(double nu, double x) {
  if (x == 0.0) return nu == 0.0 ? 0.0 : -INFINITY;
  if (x < 600.0) return std::log(std::cyl_bessel_i(nu, x)) - x;
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * 8.0 * x);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::log(sum) - 0.5 * std::log(2.0 * std::numbers::pi * x);
}

/// Mean resultant length A_q(kappa) = I_{(q+1)/2}(kappa) / I_{(q-1)/2}(kappa)
/// of a von Mises-Fisher law on the q-sphere.
inline double vmf_mean_resultant(int q, double kappa) {
  if (kappa == 0.0) return 0.0;
  return std::exp(log_scaled_bessel_i(0.5 * (q + 1), kappa) -
                  log_scaled_bessel_i(0.5 * (q - 1), kappa));
}

/// log C_q(kappa) - kappa, where C_q(kappa) exp(kappa mu^T x) is the vMF density.
inline double vmf_log_scaled_normalizer(int q, double kappa) {
  const double nu = 0.5 * (q - 1);
  return nu * std::log(kappa) - 0.5 * (q + 1) * std::log(2.0 * std::numbers::pi) -
         log_scaled_bessel_i(nu, kappa);
}

}  // namespace dirgof
