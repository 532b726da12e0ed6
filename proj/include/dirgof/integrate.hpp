#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dirgof/core.hpp"

namespace dirgof {

struct QuadratureTolerance {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  unsigned max_depth = 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

template <class F>
QuadratureResult gauss_kronrod_raw(F&& f, double a, double b, const QuadratureTolerance& tol) {
  QuadratureResult r;
  double l1 = 0.0;
  r.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      f, a, b, tol.max_depth, tol.rel_tol * 1e-2, &r.error, &l1);
  return r;
}

inline void check_converged(const QuadratureResult& r, double a, double b,
                            const QuadratureTolerance& tol) {
  if (!std::isfinite(r.value) ||
      r.error > std::max(tol.abs_tol, tol.rel_tol * std::abs(r.value))) {
    std::ostringstream msg;
    msg << "error estimate " << r.error << " for value " << r.value << " on [" << a << ", " << b
        << "]";
    throw Error(ErrorCode::nonconvergent_quadrature, msg.str());
  }
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (21 point) on a finite interval. Throws
/// nonconvergent_quadrature when the error estimate misses the tolerance.
template <class F>
double integrate_interval(F&& f, double a, double b, QuadratureTolerance tol = {}) {
  const QuadratureResult r = detail::gauss_kronrod_raw(f, a, b, tol);
  detail::check_converged(r, a, b, tol);
  return r.value;
}

/// Integral over [a, b] split at interior breakpoints; the tolerance applies
/// to the total.
template <class F>
double integrate_pieces(F&& f, double a, double b, const std::vector<double>& breaks,
                        QuadratureTolerance tol = {}) {
  QuadratureResult total;
  double lo = a;
  auto add = [&](double x0, double x1) {
    const QuadratureResult r = detail::gauss_kronrod_raw(f, x0, x1, tol);
    total.value += r.value;
    total.error += r.error;
  };
  for (double br : breaks) {
    if (br <= lo || br >= b) continue;
    add(lo, br);
    lo = br;
  }
  add(lo, b);
  detail::check_converged(total, a, b, tol);
  return total.value;
}

/// Integral over [0, inf) through the map s = -log(u), u in (0, 1].
template <class F>
double integrate_half_line(F&& f, QuadratureTolerance tol = {}) {
  auto g = [&f](double u) -> double {
    if (u <= 0.0) return 0.0;
    const double v = f(-std::log(u));
    return v == 0.0 ? 0.0 : v / u;
  };
  // Breakpoints at s = 1, 4 keep the kernel bulk away from a single panel.
  return integrate_pieces(g, 0.0, 1.0, {std::exp(-4.0), std::exp(-1.0)}, tol);
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  require(order >= 1, ErrorCode::invalid_argument, "Gauss-Legendre order must be >= 1");
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = order * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = order * (z * p1 - p2) / (z * z - 1.0);
    }
    nodes[i] = -z;
    nodes[order - 1 - i] = z;
    weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace dirgof
