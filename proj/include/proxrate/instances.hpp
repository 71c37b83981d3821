#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "proxrate/pgm.hpp"
#include "proxrate/problem.hpp"

namespace proxrate {

inline constexpr std::string_view kInstanceMagic = "PROXRATE-INST-v1\n";

// Oracle solution attached to an instance: x*, its objective value, and the
// achieved ||G_s(x*)|| certifying its quality.
struct Reference {
  Vec x_star;
  double phi_star = 0.0;
  double certified_eps = 0.0;
};

struct LassoInstance {
  Mat A;
  Vec b;
  double lambda = 0.0;
  double L = 0.0;  // certified upper bound on lambda_max(A^T A)
  Vec planted;     // ground-truth sparse vector the observation was built from
  std::optional<Reference> reference;
};

// Separable 2-D Gaussian convolution, kernel truncated at radius
// floor(4 sigma) and normalized to sum 1, with half-sample symmetric
// (reflexive) boundary handling. Symmetric as an operator, nonnegative with
// unit row sums, so its spectral norm is exactly 1.
class BlurOperator {
 public:
  BlurOperator(int height, int width, double kernel_sigma);

  Vec apply(const Vec& img) const;  // adjoint == apply (symmetric)
  int height() const { return height_; }
  int width() const { return width_; }
  int radius() const { return radius_; }
  const std::vector<double>& kernel() const { return kernel_; }

 private:
  int height_;
  int width_;
  int radius_;
  std::vector<double> kernel_;
};

struct DeblurInstance {
  int height = 0;
  int width = 0;
  double kernel_sigma = 0.0;
  Vec observed;  // b, flattened row-major
  double lambda = 0.0;
  double L = 1.0;
  Vec clean;  // may be empty when unknown
  std::optional<Reference> reference;
  std::shared_ptr<const BlurOperator> blur;
};

using Instance = std::variant<LassoInstance, DeblurInstance>;

// f(x) = 1/2 ||Bx - b||^2 applied matrix-free through a symmetric operator:
// the gradient is B(Bx - b).
class OperatorLeastSquaresOracle final : public SmoothOracle {
 public:
  OperatorLeastSquaresOracle(std::shared_ptr<const BlurOperator> op, Vec b,
                             double lipschitz)
      : op_(std::move(op)), b_(std::move(b)), lipschitz_(lipschitz) {}
  double value(const Vec& x) const override {
    return 0.5 * (op_->apply(x) - b_).squaredNorm();
  }
  Vec gradient(const Vec& x) const override {
    return op_->apply(op_->apply(x) - b_);
  }
  double lipschitz() const override { return lipschitz_; }

 private:
  std::shared_ptr<const BlurOperator> op_;
  Vec b_;
  double lipschitz_;
};

// A has independent standard-normal entries scaled by 1/sqrt(m); the planted
// vector has `sparsity` nonzeros at uniformly drawn positions with +-1
// values; b = A*planted + noise_sigma * standard-normal noise. Every draw
// comes from the documented counter RNG, so a seed fully determines the
// instance bit-for-bit.
LassoInstance gen_random_lasso(int m, int d, int sparsity, double noise_sigma,
                               double lambda, std::uint64_t seed);

// observed = blur(clean) + noise_sigma * standard-normal noise (RNG as above).
DeblurInstance gen_deblur(const Image& clean, double kernel_sigma,
                          double noise_sigma, double lambda,
                          std::uint64_t seed);

// Piecewise-constant test image: constant 0.2 background overpainted with six
// random axis-aligned rectangles (value 0.15 + 0.8*uniform), clipped to
// [0, 1]. Deterministic in the seed.
Image make_synthetic_image(int height, int width, std::uint64_t seed);

// Power iteration on a symmetric positive-semidefinite operator. Converged
// when the relative Rayleigh-quotient change stays below tol for `confirm`
// consecutive iterations; the long confirmation run guards against
// small spectral gaps stalling the quotient early. Throws EstimationError
// (carrying the last estimate) when the budget runs out first.
double lipschitz_estimate(const std::function<Vec(const Vec&)>& sym_op,
                          Eigen::Index d, double tol, long max_iters,
                          long confirm = 1200, std::uint64_t seed = 2024);

// Oracle minimizer: accelerated run (r=4, s=0.9/L) from zero until
// ||G_s(x_k)|| <= target_eps or the iteration budget is exhausted; the
// achieved norm is returned in certified_eps (> target_eps signals a partial
// reference).
Reference solve_reference(const CompositeProblem& problem, double target_eps,
                          long max_iters = 1000000);

CompositeProblem make_problem(const LassoInstance& inst);
CompositeProblem make_problem(const DeblurInstance& inst);

// Versioned binary container (magic "PROXRATE-INST-v1\n", little-endian,
// all floats as 64-bit IEEE 754). Layout documented in the README.
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

}  // namespace proxrate
