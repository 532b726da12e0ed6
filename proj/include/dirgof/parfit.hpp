#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "dirgof/core.hpp"
#include "dirgof/sphere.hpp"

namespace dirgof {

enum class FamilyKind { constant, linear, constrained_linear, trig_s3, damped_sine_s4, custom };

/// Parametric regression family {m_theta : theta in R^s} on the q-sphere.
class ParametricFamily {
 public:
  virtual ~ParametricFamily() = default;

  virtual FamilyKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual int dim_theta() const = 0;
  virtual double predict(const Vector& theta, const Vector& x) const = 0;
  virtual Vector grad_theta(const Vector& theta, const Vector& x) const = 0;

  /// True when m_theta(x) = grad_theta(., x)^T theta with a theta-free gradient.
  virtual bool linear_in_theta() const { return false; }

  /// Starting point for iterative fits.
  virtual Vector default_init(const DirLinSample&) const { return Vector::Zero(dim_theta()); }
};

using FamilyPtr = std::shared_ptr<const ParametricFamily>;

/// m(x) = c.
class ConstantFamily final : public ParametricFamily {
 public:
  FamilyKind kind() const override { return FamilyKind::constant; }
  std::string name() const override { return "constant"; }
  int dim_theta() const override { return 1; }
  double predict(const Vector& theta, const Vector&) const override { return theta[0]; }
  Vector grad_theta(const Vector&, const Vector&) const override { return Vector::Ones(1); }
  bool linear_in_theta() const override { return true; }
};

/// m(x) = c + eta^T x, theta = (c, eta).
class LinearFamily final : public ParametricFamily {
 public:
  explicit LinearFamily(int q) : q_(q) {
    require(q >= 1, ErrorCode::invalid_argument, "linear family needs q >= 1");
  }

  FamilyKind kind() const override { return FamilyKind::linear; }
  std::string name() const override { return "linear"; }
  int dim_theta() const override { return q_ + 2; }

  double predict(const Vector& theta, const Vector& x) const override {
    return theta[0] + theta.tail(q_ + 1).dot(x);
  }

  Vector grad_theta(const Vector&, const Vector& x) const override {
    Vector g(q_ + 2);
    g[0] = 1.0;
    g.tail(q_ + 1) = x;
    return g;
  }

  bool linear_in_theta() const override { return true; }

 private:
  int q_;
};

/// m(x) = c + eta^T x subject to A eta = 0. Parameterized as theta = (c, zeta)
/// with eta = N zeta and N an orthonormal basis of null(A).
class ConstrainedLinearFamily final : public ParametricFamily {
 public:
  ConstrainedLinearFamily(int q, const Matrix& constraints) : q_(q) {
    require(q >= 1, ErrorCode::invalid_argument, "constrained family needs q >= 1");
    require(constraints.cols() == q + 1, ErrorCode::dimension_mismatch,
            "constraint matrix must have q+1 columns");
    const Eigen::Index d = q + 1;
    if (constraints.rows() == 0) {
      null_basis_ = Matrix::Identity(d, d);
      return;
    }
    // Columns of Q beyond rank(A^T) span null(A).
    Eigen::ColPivHouseholderQR<Matrix> qr(constraints.transpose());
    qr.setThreshold(1e-12);
    const Eigen::Index rank = qr.rank();
    const Matrix q_full = qr.householderQ() * Matrix::Identity(d, d);
    null_basis_ = q_full.rightCols(d - rank);
    require(null_basis_.cols() >= 1, ErrorCode::invalid_argument,
            "constraints leave no free direction for eta");
  }

  FamilyKind kind() const override { return FamilyKind::constrained_linear; }
  std::string name() const override { return "constrained-linear"; }
  int dim_theta() const override { return 1 + static_cast<int>(null_basis_.cols()); }

  double predict(const Vector& theta, const Vector& x) const override {
    return theta[0] + eta(theta).dot(x);
  }

  Vector grad_theta(const Vector&, const Vector& x) const override {
    Vector g(dim_theta());
    g[0] = 1.0;
    g.tail(null_basis_.cols()) = null_basis_.transpose() * x;
    return g;
  }

  bool linear_in_theta() const override { return true; }

  Vector eta(const Vector& theta) const { return null_basis_ * theta.tail(null_basis_.cols()); }
  const Matrix& null_basis() const { return null_basis_; }

 private:
  int q_;
  Matrix null_basis_;
};

/// m(x) = c + a sin(2 pi x_2) + b cos(2 pi x_1), theta = (c, a, b).
class TrigFamily final : public ParametricFamily {
 public:
  FamilyKind kind() const override { return FamilyKind::trig_s3; }
  std::string name() const override { return "trig-s3"; }
  int dim_theta() const override { return 3; }

  double predict(const Vector& theta, const Vector& x) const override {
    return grad_theta(theta, x).dot(theta);
  }

  Vector grad_theta(const Vector&, const Vector& x) const override {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return (Vector(3) << 1.0, std::sin(two_pi * x[1]), std::cos(two_pi * x[0])).finished();
  }

  bool linear_in_theta() const override { return true; }
};

/// m(x) = c + a sin(2 pi b / (2 + x_{q+1})), theta = (c, a, b).
class DampedSineFamily final : public ParametricFamily {
 public:
  FamilyKind kind() const override { return FamilyKind::damped_sine_s4; }
  std::string name() const override { return "damped-sine-s4"; }
  int dim_theta() const override { return 3; }

  double predict(const Vector& theta, const Vector& x) const override {
    return theta[0] + theta[1] * std::sin(phase(theta[2], x));
  }

  Vector grad_theta(const Vector& theta, const Vector& x) const override {
    const double z = 2.0 + x[x.size() - 1];
    const double ph = phase(theta[2], x);
    return (Vector(3) << 1.0, std::sin(ph),
            theta[1] * std::cos(ph) * 2.0 * std::numbers::pi / z)
        .finished();
  }

  /// Best point of a 5 x 5 grid over (a, b) in [0.5, 5]^2, with c profiled out.
  Vector default_init(const DirLinSample& sample) const override {
    Vector best = Vector::Zero(3);
    double best_obj = std::numeric_limits<double>::infinity();
    const Eigen::Index n = sample.size();
    for (int ia = 0; ia < 5; ++ia) {
      for (int ib = 0; ib < 5; ++ib) {
        const double a = 0.5 + 4.5 * ia / 4.0;
        const double b = 0.5 + 4.5 * ib / 4.0;
        Vector r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          r[i] = sample.y[i] - a * std::sin(phase(b, sample.x.row(i).transpose()));
        }
        const double c = r.mean();
        const double obj = (r.array() - c).square().sum();
        if (obj < best_obj) {
          best_obj = obj;
          best << c, a, b;
        }
      }
    }
    return best;
  }

 private:
  static double phase(double b, const Vector& x) {
    return 2.0 * std::numbers::pi * b / (2.0 + x[x.size() - 1]);
  }
};

/// Family given by callables; set `linear` only if predict is exactly
/// grad(., x)^T theta with a theta-free gradient.
class CustomFamily final : public ParametricFamily {
 public:
  using PredictFn = std::function<double(const Vector&, const Vector&)>;
  using GradFn = std::function<Vector(const Vector&, const Vector&)>;

  CustomFamily(std::string name, int s, PredictFn predict, GradFn grad, bool linear = false)
      : name_(std::move(name)), s_(s), predict_(std::move(predict)), grad_(std::move(grad)),
        linear_(linear) {
    require(s >= 1, ErrorCode::invalid_argument, "family needs at least one parameter");
  }

  FamilyKind kind() const override { return FamilyKind::custom; }
  std::string name() const override { return name_; }
  int dim_theta() const override { return s_; }
  double predict(const Vector& theta, const Vector& x) const override { return predict_(theta, x); }
  Vector grad_theta(const Vector& theta, const Vector& x) const override { return grad_(theta, x); }
  bool linear_in_theta() const override { return linear_; }

 private:
  std::string name_;
  int s_;
  PredictFn predict_;
  GradFn grad_;
  bool linear_;
};

struct ThetaEstimate {
  Vector theta;
  Vector residuals;
  bool converged = true;
  int iterations = 0;
  double objective = 0.0;
  /// Objective after each accepted step (first entry: the starting point).
  std::vector<double> objective_history;
};

struct LmOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-8;
  double lambda0 = 1e-3;
};

inline Vector predict_batch(const ParametricFamily& family, const Vector& theta,
                            const PointMatrix& points) {
  require(theta.size() == family.dim_theta(), ErrorCode::dimension_mismatch,
          "theta has the wrong length for " + family.name());
  Vector out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out[i] = family.predict(theta, points.row(i).transpose());
  }
  return out;
}

inline Vector predict_batch(const ParametricFamily& family, const Vector& theta,
                            const std::vector<SpherePoint>& points) {
  require(theta.size() == family.dim_theta(), ErrorCode::dimension_mismatch,
          "theta has the wrong length for " + family.name());
  Vector out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = family.predict(theta, points[i].coords());
  }
  return out;
}

inline Matrix jacobian(const ParametricFamily& family, const Vector& theta, const PointMatrix& points) {
  Matrix j(points.rows(), family.dim_theta());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    j.row(i) = family.grad_theta(theta, points.row(i).transpose()).transpose();
  }
  return j;
}

namespace detail {

inline ThetaEstimate finish_fit(const ParametricFamily& family, const DirLinSample& sample,
                                Vector theta) {
  ThetaEstimate est;
  est.residuals = sample.y - predict_batch(family, theta, sample.x);
  est.objective = est.residuals.squaredNorm();
  est.theta = std::move(theta);
  return est;
}

/// Linear least squares with a rank check on the design.
inline ThetaEstimate fit_linear(const ParametricFamily& family, const DirLinSample& sample) {
  const Matrix design = jacobian(family, Vector::Zero(family.dim_theta()), sample.x);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  require(qr.rank() == design.cols(), ErrorCode::rank_deficient,
          "design of the " + family.name() + " family has rank " + std::to_string(qr.rank()) +
              " < " + std::to_string(design.cols()));
  ThetaEstimate est = finish_fit(family, sample, qr.solve(sample.y));
  est.objective_history = {est.objective};
  return est;
}

/// Damped Gauss-Newton with Marquardt scaling diag(J^T J).
inline ThetaEstimate fit_lm(const ParametricFamily& family, const DirLinSample& sample,
                            Vector theta, const LmOptions& opt) {
  const Eigen::Index s = theta.size();
  double lambda = opt.lambda0;
  Vector r = sample.y - predict_batch(family, theta, sample.x);
  double obj = r.squaredNorm();
  std::vector<double> history{obj};
  bool converged = false;
  int iter = 0;

  for (; iter < opt.max_iterations; ++iter) {
    const Matrix j = jacobian(family, theta, sample.x);
    const Vector g = j.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= opt.gradient_tol) {
      converged = true;
      break;
    }
    const Matrix jtj = j.transpose() * j;
    Vector scale = jtj.diagonal().cwiseMax(1e-12 * std::max(1.0, jtj.diagonal().maxCoeff()));

    bool accepted = false;
    while (lambda < 1e16) {
      Matrix damped = jtj;
      damped.diagonal() += lambda * scale;
      const Vector step = damped.ldlt().solve(g);
      const Vector trial = theta + step;
      const Vector r_trial = sample.y - predict_batch(family, trial, sample.x);
      const double obj_trial = r_trial.squaredNorm();
      if (std::isfinite(obj_trial) && obj_trial < obj) {
        const bool tiny = step.norm() <= 1e-14 * (1.0 + theta.norm()) ||
                          obj - obj_trial <= 1e-15 * obj;
        theta = trial;
        r = r_trial;
        obj = obj_trial;
        history.push_back(obj);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        // Objective reached its floating-point floor.
        if (tiny) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent available at any damping: stationary to working precision
      // when the gradient is small relative to the residual scale.
      converged = g.norm() <= 1e-6 * (1.0 + std::sqrt(obj)) * std::sqrt(static_cast<double>(s));
      break;
    }
    if (converged) {
      ++iter;
      break;
    }
  }

  ThetaEstimate est = finish_fit(family, sample, std::move(theta));
  est.converged = converged;
  est.iterations = iter;
  est.objective_history = std::move(history);
  return est;
}

}  // namespace detail

/// Least-squares fit of the family; closed form for linear-in-theta families,
/// Levenberg-Marquardt otherwise. A nonconverged fit is returned flagged.
inline ThetaEstimate fit(const ParametricFamily& family, const DirLinSample& sample,
                         const Vector& theta_init, const LmOptions& opt = {}) {
  require(sample.size() >= family.dim_theta(), ErrorCode::invalid_argument,
          "need n >= s observations to fit the " + family.name() + " family");
  if (family.linear_in_theta()) return detail::fit_linear(family, sample);
  require(theta_init.size() == family.dim_theta(), ErrorCode::dimension_mismatch,
          "theta_init has the wrong length");
  require(theta_init.allFinite(), ErrorCode::invalid_argument, "theta_init must be finite");
  return detail::fit_lm(family, sample, theta_init, opt);
}

inline ThetaEstimate fit(const ParametricFamily& family, const DirLinSample& sample) {
  if (family.linear_in_theta()) return fit(family, sample, Vector());
  return fit(family, sample, family.default_init(sample));
}

/// Estimate at a fixed parameter (simple null): residuals against theta0.
inline ThetaEstimate fixed_theta(const ParametricFamily& family, const DirLinSample& sample,
                                 const Vector& theta0) {
  require(theta0.size() == family.dim_theta(), ErrorCode::dimension_mismatch,
          "theta0 has the wrong length");
  return detail::finish_fit(family, sample, theta0);
}

inline FamilyPtr make_family(FamilyKind kind, int q, const Matrix& constraints = Matrix()) {
  switch (kind) {
    case FamilyKind::constant: return std::make_shared<ConstantFamily>();
    case FamilyKind::linear: return std::make_shared<LinearFamily>(q);
    case FamilyKind::constrained_linear:
      return std::make_shared<ConstrainedLinearFamily>(q, constraints.size() ? constraints : Matrix(0, q + 1));
    case FamilyKind::trig_s3: return std::make_shared<TrigFamily>();
    case FamilyKind::damped_sine_s4: return std::make_shared<DampedSineFamily>();
    case FamilyKind::custom: break;
  }
  throw Error(ErrorCode::invalid_argument, "custom families are built programmatically");
}

inline FamilyKind parse_family_kind(const std::string& s) {
  if (s == "constant") return FamilyKind::constant;
  if (s == "linear") return FamilyKind::linear;
  if (s == "constrained-linear") return FamilyKind::constrained_linear;
  if (s == "trig-s3") return FamilyKind::trig_s3;
  if (s == "damped-sine-s4") return FamilyKind::damped_sine_s4;
  throw Error(ErrorCode::invalid_argument, "unknown family '" + s + "'");
}

}  // namespace dirgof
