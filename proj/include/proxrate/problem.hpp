#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace proxrate {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy. Parameter errors are caller bugs (bad s, tau, shapes);
// the other types mark runtime conditions the CLI maps onto exit codes.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DimensionError : ParameterError {
  using ParameterError::ParameterError;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : IoError {
  using IoError::IoError;
};

// Smooth convex part: value, gradient, and a Lipschitz constant of the
// gradient. Implementations must be immutable after construction so problems
// can be shared across concurrent solver runs.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual double lipschitz() const = 0;
};

// Nonsmooth convex part: value and the scaled proximal map
//   scaled_prox(t, z) = argmin_u { ||u - z||^2 / (2t) + g(u) }.
class NonsmoothOracle {
 public:
  virtual ~NonsmoothOracle() = default;
  virtual double value(const Vec& x) const = 0;
  virtual Vec scaled_prox(double t, const Vec& z) const = 0;
};

// g identically zero: the prox map is the identity, which makes the proximal
// step collapse to a plain gradient step bit-for-bit.
class ZeroFunction final : public NonsmoothOracle {
 public:
  double value(const Vec&) const override { return 0.0; }
  Vec scaled_prox(double, const Vec& z) const override { return z; }
};

// Componentwise shrinkage toward zero by tau: out_i = (|z_i| - tau)_+ sgn(z_i).
inline Vec soft_threshold(const Vec& z, double tau) {
  if (tau < 0.0) throw ParameterError("soft_threshold: tau must be >= 0");
  return z.unaryExpr([tau](double v) {
    const double m = std::abs(v) - tau;
    return m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
  });
}

// g(x) = lambda * ||x||_1 with the closed-form prox (soft thresholding).
class L1Norm final : public NonsmoothOracle {
 public:
  explicit L1Norm(double lambda) : lambda_(lambda) {
    if (lambda < 0.0) throw ParameterError("L1Norm: lambda must be >= 0");
  }
  double lambda() const { return lambda_; }
  double value(const Vec& x) const override {
    return lambda_ * x.lpNorm<1>();
  }
  Vec scaled_prox(double t, const Vec& z) const override {
    return soft_threshold(z, lambda_ * t);
  }

 private:
  double lambda_;
};

// f(x) = 0.5 * ||Ax - b||^2 with a caller-supplied Lipschitz constant
// (largest eigenvalue of A^T A, possibly inflated to a certified upper bound).
class LeastSquaresOracle final : public SmoothOracle {
 public:
  LeastSquaresOracle(Mat A, Vec b, double lipschitz)
      : A_(std::move(A)), b_(std::move(b)), lipschitz_(lipschitz) {
    if (A_.rows() != b_.size())
      throw DimensionError("LeastSquaresOracle: A rows must match b size");
  }
  double value(const Vec& x) const override {
    return 0.5 * (A_ * x - b_).squaredNorm();
  }
  Vec gradient(const Vec& x) const override {
    return A_.transpose() * (A_ * x - b_);
  }
  double lipschitz() const override { return lipschitz_; }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }

 private:
  Mat A_;
  Vec b_;
  double lipschitz_;
};

// Phi = f + g over R^d.
struct CompositeProblem {
  std::shared_ptr<const SmoothOracle> smooth;
  std::shared_ptr<const NonsmoothOracle> nonsmooth;
  Eigen::Index dimension = 0;

  void check_dim(const Vec& x, const char* where) const {
    if (x.size() != dimension)
      throw DimensionError(std::string(where) + ": vector has dimension " +
                           std::to_string(x.size()) + ", problem expects " +
                           std::to_string(dimension));
  }
};

inline double objective(const CompositeProblem& p, const Vec& x) {
  p.check_dim(x, "objective");
  return p.smooth->value(x) + p.nonsmooth->value(x);
}

// Q_s(x, y) = f(y) + <grad f(y), x - y> + ||x - y||^2 / (2s) + g(x):
// the prox-regularized linearization whose minimizer over x is the proximal
// step from y.
inline double quadratic_approx(const CompositeProblem& p, double s,
                               const Vec& x, const Vec& y) {
  if (s <= 0.0) throw ParameterError("quadratic_approx: s must be > 0");
  p.check_dim(x, "quadratic_approx");
  p.check_dim(y, "quadratic_approx");
  const Vec d = x - y;
  return p.smooth->value(y) + p.smooth->gradient(y).dot(d) +
         d.squaredNorm() / (2.0 * s) + p.nonsmooth->value(x);
}

}  // namespace proxrate
