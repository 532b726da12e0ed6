#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "dirgof/core.hpp"

namespace dirgof::stats {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// P(K > x) for the limiting Kolmogorov law, K = sup |Brownian bridge|.
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.0) {
    // Small-x series of the CDF: sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) cdf += std::exp(c * (2 * k - 1) * (2 * k - 1));
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * cdf;
  }
  double sf = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sf += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF, with the
/// asymptotic p-value P(K > sqrt(n) D).
template <class Cdf>
TestResult ks_test(std::vector<double> x, Cdf&& cdf) {
  require(!x.empty(), ErrorCode::invalid_argument, "KS test needs data");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return {d, kolmogorov_sf(std::sqrt(n) * d)};
}

inline TestResult ks_test_normal(const std::vector<double>& x, double mean = 0.0, double sd = 1.0) {
  return ks_test(x, [&](double v) { return normal_cdf((v - mean) / sd); });
}

inline TestResult ks_test_uniform(const std::vector<double>& x) {
  return ks_test(x, [](double v) { return std::clamp(v, 0.0, 1.0); });
}

/// Shapiro-Wilk W with Royston's (1995) approximations for the coefficients
/// and the p-value; valid for 3 <= n <= 5000.
inline TestResult shapiro_wilk(std::vector<double> x) {
  const std::size_t n = x.size();
  require(n >= 3, ErrorCode::invalid_argument, "Shapiro-Wilk needs n >= 3");
  require(n <= 5000, ErrorCode::invalid_argument, "Shapiro-Wilk approximation needs n <= 5000");
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  require(range > 0.0, ErrorCode::invalid_argument, "Shapiro-Wilk needs non-constant data");

  const double nd = static_cast<double>(n);
  std::vector<double> a(n);
  if (n == 3) {
    a = {-std::sqrt(0.5), 0.0, std::sqrt(0.5)};
  } else {
    std::vector<double> m(n);
    double mm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = normal_quantile((i + 1 - 0.375) / (nd + 0.25));
      mm += m[i] * m[i];
    }
    const double u = 1.0 / std::sqrt(nd);
    auto poly = [u](const double* c) {
      return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]);
    };
    constexpr double c1[6] = {-2.706056, 4.434685, -2.071190, -0.147981, 0.221157, 0.0};
    constexpr double c2[6] = {-3.582633, 5.682633, -1.752461, -0.293762, 0.042981, 0.0};
    const double an = poly(c1) + m[n - 1] / std::sqrt(mm);
    double phi = 0.0;
    std::size_t fixed = 1;
    double an1 = 0.0;
    if (n > 5) {
      an1 = poly(c2) + m[n - 2] / std::sqrt(mm);
      phi = (mm - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
            (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      fixed = 2;
    } else {
      phi = (mm - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
    }
    for (std::size_t i = 0; i < n; ++i) a[i] = m[i] / std::sqrt(phi);
    a[n - 1] = an;
    a[0] = -an;
    if (fixed == 2) {
      a[n - 2] = an1;
      a[1] = -an1;
    }
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= nd;
  double ss = 0.0, num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss += (x[i] - mean) * (x[i] - mean);
    num += a[i] * x[i];
  }
  const double w = std::min(1.0, num * num / ss);

  TestResult out;
  out.statistic = w;
  if (n == 3) {
    const double p = 6.0 / std::numbers::pi * (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75)));
    out.p_value = std::clamp(p, 0.0, 1.0);
    return out;
  }
  double z = 0.0;
  if (n <= 11) {
    const double gamma = 0.459 * nd - 2.273;
    const double y = -std::log(gamma - std::log1p(-w));
    const double mu = 0.5440 - 0.39978 * nd + 0.025054 * nd * nd - 0.0006714 * nd * nd * nd;
    const double sigma = std::exp(1.3822 - 0.77857 * nd + 0.062767 * nd * nd - 0.0020322 * nd * nd * nd);
    z = (y - mu) / sigma;
  } else {
    const double ln = std::log(nd);
    const double y = std::log1p(-w);
    const double mu = 0.0038915 * ln * ln * ln - 0.083751 * ln * ln - 0.31082 * ln - 1.5861;
    const double sigma = std::exp(0.0030302 * ln * ln - 0.082676 * ln - 0.4803);
    z = (y - mu) / sigma;
  }
  out.p_value = 1.0 - normal_cdf(z);
  return out;
}

struct Band {
  double lower = 0.0;
  double upper = 1.0;
};

/// Central binomial band for a proportion: [k_lo / M, k_hi / M] with k_lo,
/// k_hi the (1 -/+ level)/2 quantiles of Binomial(M, p).
inline Band binomial_band(int m, double p, double level = 0.99) {
  require(m >= 1 && p > 0.0 && p < 1.0, ErrorCode::invalid_argument, "binomial band needs M >= 1, 0 < p < 1");
  const boost::math::binomial_distribution<double> dist(m, p);
  const double tail = 0.5 * (1.0 - level);
  int lo = 0;
  while (lo < m && boost::math::cdf(dist, lo) < tail) ++lo;
  int hi = lo;
  while (hi < m && boost::math::cdf(dist, hi) < 1.0 - tail) ++hi;
  return {static_cast<double>(lo) / m, static_cast<double>(hi) / m};
}

inline double proportion_se(double p, int m) { return std::sqrt(p * (1.0 - p) / m); }

}  // namespace dirgof::stats
