#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dirgof/core.hpp"
#include "dirgof/kernel.hpp"
#include "dirgof/sphere.hpp"
#include "dirgof/special.hpp"

namespace dirgof {

/// One von Mises-Fisher component; kappa = 0 is the uniform law.
struct VmfComponent {
  Vector mean;
  double kappa = 0.0;
  double weight = 1.0;
};

enum class DensityKind { uniform, vmf, mixture };

/// Finite mixture of vMF laws on the q-sphere.
class DirDensityModel {
 public:
  DirDensityModel(int q, std::vector<VmfComponent> components, std::string label = "")
      : q_(q), components_(std::move(components)), label_(std::move(label)) {
    require(q_ >= 1, ErrorCode::invalid_argument, "density needs q >= 1");
    require(!components_.empty(), ErrorCode::invalid_argument, "density needs a component");
    double total = 0.0;
    for (auto& c : components_) {
      require(c.weight > 0.0, ErrorCode::invalid_argument, "mixing weights must be positive");
      require(c.kappa >= 0.0, ErrorCode::invalid_argument, "concentration must be >= 0");
      if (c.mean.size() == 0) c.mean = Vector::Unit(q_ + 1, q_);
      require(c.mean.size() == q_ + 1, ErrorCode::dimension_mismatch,
              "component mean must live in R^{q+1}");
      c.mean.normalize();
      total += c.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::invalid_argument,
            "mixing weights must sum to one");
  }

  static DirDensityModel uniform(int q) { return DirDensityModel(q, {{Vector(), 0.0, 1.0}}, "uniform"); }

  static DirDensityModel vmf(const Vector& mean, double kappa) {
    return DirDensityModel(static_cast<int>(mean.size()) - 1, {{mean, kappa, 1.0}}, "vmf");
  }

  int q() const { return q_; }
  const std::vector<VmfComponent>& components() const { return components_; }
  const std::string& label() const { return label_; }

  DensityKind kind() const {
    if (components_.size() > 1) return DensityKind::mixture;
    return components_.front().kappa == 0.0 ? DensityKind::uniform : DensityKind::vmf;
  }

  /// w * this + (1 - w) * other.
  DirDensityModel blend(double w, const DirDensityModel& other, std::string label = "") const {
    require(other.q_ == q_, ErrorCode::dimension_mismatch, "cannot blend densities of different q");
    std::vector<VmfComponent> comps;
    for (auto c : components_) { c.weight *= w; comps.push_back(c); }
    for (auto c : other.components_) { c.weight *= 1.0 - w; comps.push_back(c); }
    // Renormalize rounding in the weights.
    double total = 0.0;
    for (const auto& c : comps) total += c.weight;
    for (auto& c : comps) c.weight /= total;
    return DirDensityModel(q_, std::move(comps), std::move(label));
  }

 private:
  int q_;
  std::vector<VmfComponent> components_;
  std::string label_;
};

inline double density_eval(const DirDensityModel& model, const Vector& x) {
  require(x.size() == model.q() + 1, ErrorCode::dimension_mismatch, "point dimension mismatch");
  const int q = model.q();
  double total = 0.0;
  for (const auto& c : model.components()) {
    if (c.kappa == 0.0) {
      total += c.weight / surface_area(q);
    } else {
      total += c.weight * std::exp(vmf_log_scaled_normalizer(q, c.kappa) +
                                   c.kappa * (c.mean.dot(x) - 1.0));
    }
  }
  return total;
}

inline double density_eval(const DirDensityModel& model, const SpherePoint& x) {
  return density_eval(model, x.coords());
}

namespace detail {

/// Inverse-CDF table for t = mu^T X under vMF(kappa) on the q-sphere; built in
/// the polar angle psi where the marginal is prop. to exp(kappa cos psi) sin^{q-1} psi.
class VmfMarginal {
 public:
  static constexpr int grid = 4096;

  VmfMarginal(int q, double kappa) : psi_(grid + 1), cdf_(grid + 1) {
    const double step = std::numbers::pi / grid;
    std::vector<double> dens(grid + 1);
    for (int i = 0; i <= grid; ++i) {
      psi_[i] = step * i;
      dens[i] = std::exp(kappa * (std::cos(psi_[i]) - 1.0)) * std::pow(std::sin(psi_[i]), q - 1);
    }
    cdf_[0] = 0.0;
    for (int i = 1; i <= grid; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * step * (dens[i - 1] + dens[i]);
    const double total = cdf_[grid];
    for (double& v : cdf_) v /= total;
  }

  double draw_t(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto hi = std::clamp<std::ptrdiff_t>(it - cdf_.begin(), 1, grid);
    const double c0 = cdf_[hi - 1];
    const double c1 = cdf_[hi];
    const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return std::cos(psi_[hi - 1] + frac * (psi_[hi] - psi_[hi - 1]));
  }

 private:
  std::vector<double> psi_;
  std::vector<double> cdf_;
};

}  // namespace detail

/// n iid draws from the model, one per row. vMF components use the
/// tangent-normal construction t mu + sqrt(1 - t^2) B_mu xi.
template <class Urbg>
PointMatrix density_sample(const DirDensityModel& model, Eigen::Index n, Urbg& rng) {
  require(n >= 1, ErrorCode::invalid_argument, "sample size must be >= 1");
  const int q = model.q();
  const auto& comps = model.components();

  std::vector<double> weights;
  for (const auto& c : comps) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<detail::VmfMarginal> marginals;
  std::vector<ProjectionBasis> bases;
  for (const auto& c : comps) {
    marginals.emplace_back(q, c.kappa);
    bases.push_back(projection_basis(SpherePoint(c.mean)));
  }

  PointMatrix out(n, q + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t k = comps.size() == 1 ? 0 : pick(rng);
    if (comps[k].kappa == 0.0) {
      out.row(i) = sample_uniform(q, 1, rng).row(0);
      continue;
    }
    const double t = marginals[k].draw_t(unif(rng));
    const Vector xi = uniform_direction(q, rng);
    out.row(i) = tangent_normal_point(bases[k], std::clamp(t, -1.0, 1.0), xi).coords().transpose();
  }
  return out;
}

/// Kernel density estimate at x: (1/n) sum_i L_h(x, X_i).
inline double kde(const Vector& x, const PointMatrix& sample, const BandwidthKernel& kern) {
  require(sample.rows() >= 1, ErrorCode::invalid_argument, "kde needs at least one point");
  require(sample.cols() == x.size(), ErrorCode::dimension_mismatch,
          "kde point and sample dimensions differ");
  double total = 0.0;
  for (Eigen::Index i = 0; i < sample.rows(); ++i) total += kern.raw(sample.row(i).dot(x));
  return kern.c * total / static_cast<double>(sample.rows());
}

inline double kde(const SpherePoint& x, const PointMatrix& sample, double h,
                  const DirectionalKernel& kernel) {
  return kde(x.coords(), sample, BandwidthKernel(kernel, x.q(), h));
}

// Stand-ins for the named design densities of the simulation study. The
// original parameterizations are defined elsewhere; these keep the
// qualitative shapes (uniform, single mode, symmetric multimodal, polar
// cluster, bimodal) and are fully pluggable.

inline DirDensityModel model_m1(int q) { return DirDensityModel(q, {{Vector(), 0.0, 1.0}}, "M1"); }

inline DirDensityModel model_m4(int q) {
  return DirDensityModel(q, {{Vector::Unit(q + 1, q), 2.0, 1.0}}, "M4*");
}

inline DirDensityModel model_m12(int q) {
  std::vector<VmfComponent> comps;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 3.0;
    Vector mu = Vector::Zero(q + 1);
    mu[0] = std::cos(a);
    mu[1] = std::sin(a);
    comps.push_back({mu, 5.0, 1.0 / 3.0});
  }
  return DirDensityModel(q, std::move(comps), "M12*");
}

inline DirDensityModel model_m16(int q) {
  return DirDensityModel(q, {{Vector::Unit(q + 1, 0), 4.0, 0.5}, {-Vector::Unit(q + 1, 0), 4.0, 0.5}},
                         "M16*");
}

inline DirDensityModel model_m20(int q) {
  const Vector pole = Vector::Unit(q + 1, q);
  const Vector side = Vector::Unit(q + 1, 0);
  const Vector other = q >= 2 ? Vector::Unit(q + 1, 1) : side;
  const double a1 = std::numbers::pi / 8.0;
  const double a2 = std::numbers::pi / 4.0;
  std::vector<VmfComponent> comps{
      {std::cos(a1) * pole + std::sin(a1) * side, 10.0, 0.25},
      {std::cos(a1) * pole - std::sin(a1) * side, 10.0, 0.25},
      {std::cos(a2) * pole + std::sin(a2) * other, 10.0, 0.25},
      {std::cos(a2) * pole - std::sin(a2) * other, 10.0, 0.25},
  };
  return DirDensityModel(q, std::move(comps), "M20*");
}

}  // namespace dirgof
