#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dirgof/core.hpp"
#include "dirgof/density.hpp"
#include "dirgof/goftest.hpp"
#include "dirgof/parallel.hpp"
#include "dirgof/parfit.hpp"
#include "dirgof/sphere.hpp"

namespace dirgof {

inline double deviation_delta1(const Vector& x) {
  const double z = x[x.size() - 1];
  return std::cos(2.0 * std::numbers::pi * x[0]) * (z * z * z - 1.0) / std::log(2.0 + std::abs(z));
}

inline double deviation_delta2(const Vector& x) {
  return std::cos(2.0 * std::numbers::pi * x[0] * x[0] * x[1]) * std::exp(x[x.size() - 1]);
}

inline double deviation_delta1(const SpherePoint& x) { return deviation_delta1(x.coords()); }
inline double deviation_delta2(const SpherePoint& x) { return deviation_delta2(x.coords()); }

enum class NoiseKind { homoscedastic, heteroscedastic, fixed };
enum class DeviationKind { none, delta1, delta2 };

/// Data-generating model Y = m_theta0(X) + delta Delta(X) + sigma(X) eps.
struct Scenario {
  std::string id;
  int q = 1;
  FamilyPtr family;
  Vector theta0;
  DirDensityModel design = DirDensityModel::uniform(1);
  NoiseKind noise = NoiseKind::homoscedastic;
  /// Standard deviation used by NoiseKind::fixed.
  double fixed_sigma = 0.5;
  DeviationKind deviation = DeviationKind::none;
  double delta = 0.0;
  /// Deviation coefficient of the alternative (used when the deviation is switched on).
  double alt_delta = 0.0;

  double sigma(const Vector& x) const {
    switch (noise) {
      case NoiseKind::homoscedastic: return 0.5;
      case NoiseKind::heteroscedastic: return 0.25 + 3.0 * density_eval(model_m16(q), x);
      case NoiseKind::fixed: return fixed_sigma;
    }
    return 0.5;
  }

  double deviation_value(const Vector& x) const {
    switch (deviation) {
      case DeviationKind::none: return 0.0;
      case DeviationKind::delta1: return deviation_delta1(x);
      case DeviationKind::delta2: return deviation_delta2(x);
    }
    return 0.0;
  }

  double mean(const Vector& x) const { return family->predict(theta0, x) + delta * deviation_value(x); }

  /// Same scenario with the deviation switched on at coefficient `d`.
  Scenario with_delta(double d) const {
    Scenario s = *this;
    s.delta = d;
    return s;
  }
  Scenario alternative() const { return with_delta(alt_delta); }
  Scenario null() const { return with_delta(0.0); }
};

/// Scenarios S1-S4 (null versions; use alternative() for the deviation), and
/// "QQ": constant zero mean, uniform design, sigma^2 = 1/2.
inline Scenario make_scenario(const std::string& id, int q) {
  require(q >= 1, ErrorCode::invalid_argument, "scenario needs q >= 1");
  Scenario s;
  s.id = id;
  s.q = q;
  if (id == "S1") {
    s.family = std::make_shared<ConstantFamily>();
    s.theta0 = Vector::Zero(1);
    s.design = model_m1(q);
    s.noise = NoiseKind::heteroscedastic;
    s.deviation = DeviationKind::delta1;
    s.alt_delta = 0.75;
  } else if (id == "S2") {
    s.family = std::make_shared<LinearFamily>(q);
    s.theta0 = Vector::Constant(q + 2, 0.5);
    s.theta0[0] = 1.0;
    s.theta0[1] = -1.5;
    s.design = model_m4(q).blend(0.6, model_m1(q), "3/5 M4* + 2/5 M1");
    s.noise = NoiseKind::heteroscedastic;
    s.deviation = DeviationKind::delta1;
    s.alt_delta = -0.75;
  } else if (id == "S3") {
    s.family = std::make_shared<TrigFamily>();
    s.theta0 = (Vector(3) << 0.0, 1.0, 1.5).finished();
    s.design = model_m12(q).blend(0.6, model_m1(q), "3/5 M12* + 2/5 M1");
    s.noise = NoiseKind::homoscedastic;
    s.deviation = DeviationKind::delta2;
    s.alt_delta = 0.75;
  } else if (id == "S4") {
    s.family = std::make_shared<DampedSineFamily>();
    s.theta0 = (Vector(3) << 0.0, 3.0, 4.0).finished();
    s.design = model_m20(q);
    s.noise = NoiseKind::homoscedastic;
    s.deviation = DeviationKind::delta2;
    s.alt_delta = 0.5;
  } else if (id == "QQ") {
    s.family = std::make_shared<ConstantFamily>();
    s.theta0 = Vector::Zero(1);
    s.design = model_m1(q);
    s.noise = NoiseKind::fixed;
    s.fixed_sigma = std::sqrt(0.5);
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown scenario '" + id + "'");
  }
  return s;
}

template <class Urbg>
DirLinSample generate(const Scenario& sc, Eigen::Index n, Urbg& rng) {
  require(n >= 1, ErrorCode::invalid_argument, "sample size must be >= 1");
  PointMatrix x = density_sample(sc.design, n, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = x.row(i).transpose();
    y[i] = sc.mean(xi) + sc.sigma(xi) * gauss(rng);
  }
  return DirLinSample(std::move(x), std::move(y));
}

/// c_n = (n h^{q/2})^{-1/2}, the local-alternative drift rate.
inline double local_alternative_scale(double n, double h, int q) {
  require(n > 0.0 && h > 0.0 && q >= 1, ErrorCode::invalid_argument,
          "local alternative scale needs positive n, h, q");
  return 1.0 / std::sqrt(n * std::pow(h, 0.5 * q));
}

/// `count` log-spaced values from lo to hi.
inline std::vector<double> log_grid(double lo, double hi, int count) {
  require(lo > 0.0 && hi > lo && count >= 2, ErrorCode::invalid_argument,
          "log grid needs 0 < lo < hi and count >= 2");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  g.back() = hi;
  return g;
}

struct TraceConfig {
  Eigen::Index n = 100;
  std::vector<double> h_grid = log_grid(0.1, 2.0, 20);
  int M = 500;
  int B = 200;
  std::vector<double> alphas{0.01, 0.05, 0.10};
  std::uint64_t seed = 1;
  int workers = 1;
  /// Degree, kernel and quadrature options; h is overwritten per grid point.
  GofConfig test;

  void validate() const {
    require(n >= 2, ErrorCode::invalid_argument, "trace needs n >= 2");
    require(M >= 1 && B >= 1, ErrorCode::invalid_argument, "trace needs M, B >= 1");
    require(!h_grid.empty(), ErrorCode::invalid_argument, "bandwidth grid is empty");
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
      require(h_grid[i] > 0.0, ErrorCode::invalid_argument, "bandwidths must be positive");
      require(i == 0 || h_grid[i] > h_grid[i - 1], ErrorCode::invalid_argument,
              "bandwidth grid must be strictly increasing");
    }
    for (double a : alphas) {
      require(a > 0.0 && a < 1.0, ErrorCode::invalid_argument, "alphas must lie in (0, 1)");
    }
  }
};

struct TraceResult {
  std::string scenario;
  int q = 1;
  Eigen::Index n = 0;
  int M = 0;
  int B = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::vector<double> h_grid;
  std::vector<double> alphas;
  /// M x |grid| p-values.
  Matrix p_values;
  /// |grid| x |alphas| proportions of p < alpha.
  Matrix rejection;
};

/// Empirical rejection rates over a bandwidth grid. Each trial draws one
/// sample and one multiplier matrix from its own substreams and reuses both
/// for every bandwidth.
inline TraceResult significance_trace(const Scenario& sc, const TraceConfig& cfg) {
  cfg.validate();
  const auto hs = cfg.h_grid.size();
  TraceResult out;
  out.scenario = sc.id;
  out.q = sc.q;
  out.n = cfg.n;
  out.M = cfg.M;
  out.B = cfg.B;
  out.seed = cfg.seed;
  out.delta = sc.delta;
  out.h_grid = cfg.h_grid;
  out.alphas = cfg.alphas;
  out.p_values.resize(cfg.M, static_cast<Eigen::Index>(hs));

  parallel_for(static_cast<std::size_t>(cfg.M), cfg.workers, [&](std::size_t trial) {
    const auto t = static_cast<std::uint64_t>(trial);
    Rng data_rng = substream(cfg.seed, {1, t});
    const DirLinSample sample = generate(sc, cfg.n, data_rng);
    Matrix mult(cfg.n, cfg.B);
    for (int b = 0; b < cfg.B; ++b) {
      Rng r = substream(cfg.seed, {2, t, static_cast<std::uint64_t>(b)});
      mult.col(b) = golden_section_draws(cfg.n, r);
    }
    GofConfig gc = cfg.test;
    gc.B = cfg.B;
    gc.seed = cfg.seed;
    gc.workers = 1;
    for (std::size_t j = 0; j < hs; ++j) {
      gc.local.h = cfg.h_grid[j];
      try {
        const GofCache cache = build_cache(sample.x, gc);
        out.p_values(static_cast<Eigen::Index>(trial), static_cast<Eigen::Index>(j)) =
            bootstrap_test(sample, *sc.family, gc, cache, mult).p_value;
      } catch (const Error& e) {
        throw Error(e.code(), "scenario " + sc.id + ", trial " + std::to_string(trial) +
                                  ", h = " + std::to_string(cfg.h_grid[j]) + ": " + e.what());
      }
    }
  });

  out.rejection.resize(static_cast<Eigen::Index>(hs), static_cast<Eigen::Index>(cfg.alphas.size()));
  for (std::size_t j = 0; j < hs; ++j) {
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
      const auto col = out.p_values.col(static_cast<Eigen::Index>(j));
      out.rejection(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(a)) =
          static_cast<double>((col.array() < cfg.alphas[a]).count()) / cfg.M;
    }
  }
  return out;
}

struct QqConfig {
  Eigen::Index n = 5000;
  /// 0 means 0.5 n^{-1/3}.
  double h = 0.0;
  int M = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  GofConfig test;
};

struct QqResult {
  double h = 0.0;
  CenterScale center_scale;
  double nu2 = 0.0;
  Vector t_std;
};

/// Standardized statistics n h^{q/2} (T_n - center) / sqrt(2 nu^2) over M
/// samples of a fixed-variance scenario, using its known sigma.
inline QqResult qq_statistics(const Scenario& sc, const QqConfig& cfg) {
  require(sc.noise == NoiseKind::fixed, ErrorCode::invalid_argument,
          "the normality check needs a scenario with known constant variance");
  require(cfg.M >= 1 && cfg.n >= 2, ErrorCode::invalid_argument, "qqcheck needs M >= 1, n >= 2");
  QqResult out;
  out.h = cfg.h > 0.0 ? cfg.h : 0.5 / std::cbrt(static_cast<double>(cfg.n));
  GofConfig gc = cfg.test;
  gc.local.h = out.h;
  gc.seed = cfg.seed;
  const int q = sc.q;
  const double s2 = sc.fixed_sigma * sc.fixed_sigma;
  const double area = surface_area(q);
  out.nu2 = nu_squared(gc.local.kernel, q, s2 * s2 * area);
  out.center_scale = asymptotic_center_scale(gc.local, q, s2 * area, out.nu2, static_cast<double>(cfg.n));
  out.t_std.resize(cfg.M);
  parallel_for(static_cast<std::size_t>(cfg.M), cfg.workers, [&](std::size_t rep) {
    Rng rng = substream(cfg.seed, {3, static_cast<std::uint64_t>(rep)});
    const DirLinSample sample = generate(sc, cfg.n, rng);
    const ThetaEstimate est = fit(*sc.family, sample);
    const GofCache cache = build_cache(sample.x, gc);
    out.t_std[static_cast<Eigen::Index>(rep)] = standardized_statistic(
        statistic(cache, est.residuals), out.center_scale, static_cast<double>(cfg.n), out.h, q);
  });
  return out;
}

}  // namespace dirgof
