#include <doctest.h>

#include <cmath>
#include <memory>
#include <type_traits>

#include "proxrate/instances.hpp"
#include "proxrate/problem.hpp"
#include "proxrate/rng.hpp"

using namespace proxrate;

namespace {

// f(x) = 0.5 ||x||^2 over R^d.
CompositeProblem half_norm_sq(int d) {
  CompositeProblem p;
  p.smooth = std::make_shared<LeastSquaresOracle>(
      Mat::Identity(d, d), Vec::Zero(d), 1.0);
  p.nonsmooth = std::make_shared<ZeroFunction>();
  p.dimension = d;
  return p;
}

// f(x) = 0.5 (x - 1)^2, g(x) = 0.3 |x|; minimizer x* = 0.7.
CompositeProblem scalar_lasso() {
  CompositeProblem p;
  Mat A(1, 1);
  A << 1.0;
  Vec b(1);
  b << 1.0;
  p.smooth = std::make_shared<LeastSquaresOracle>(A, b, 1.0);
  p.nonsmooth = std::make_shared<L1Norm>(0.3);
  p.dimension = 1;
  return p;
}

Vec random_vec(CounterRng& rng, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("error types nest so one catch level per failure class suffices") {
  static_assert(std::is_base_of_v<ParameterError, DimensionError>);
  static_assert(std::is_base_of_v<std::invalid_argument, ParameterError>);
  static_assert(std::is_base_of_v<IoError, FormatError>);
  static_assert(std::is_base_of_v<std::runtime_error, IoError>);
}

TEST_CASE("objective sums the smooth and nonsmooth values") {
  const CompositeProblem q = half_norm_sq(2);
  Vec x(2);
  x << 3.0, 4.0;
  CHECK(objective(q, x) == doctest::Approx(12.5).epsilon(1e-15));

  const CompositeProblem lasso = scalar_lasso();
  Vec z(1);
  z << 0.7;
  CHECK(objective(lasso, z) == doctest::Approx(0.255).epsilon(1e-15));

  Vec wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(objective(q, wrong), DimensionError);
}

TEST_CASE("objective at the solved minimizer undercuts random perturbations") {
  const CompositeProblem lasso = scalar_lasso();
  const Reference ref = solve_reference(lasso, 1e-10);
  const double phi_star = objective(lasso, ref.x_star);
  CounterRng rng(17);
  for (int i = 0; i < 100; ++i) {
    const Vec probe = ref.x_star + 0.5 * random_vec(rng, 1);
    CHECK(phi_star <= objective(lasso, probe) + 1e-12);
  }
}

TEST_CASE("quadratic surrogate at zero displacement is the objective") {
  const CompositeProblem lasso = scalar_lasso();
  Vec y(1);
  y << 0.3;
  CHECK(quadratic_approx(lasso, 0.7, y, y) == objective(lasso, y));
}

TEST_CASE("quadratic surrogate hand value and parameter guard") {
  const CompositeProblem q = half_norm_sq(1);
  Vec y(1), x(1);
  y << 0.0;
  x << 1.0;
  CHECK(quadratic_approx(q, 1.0, x, y) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(quadratic_approx(q, 0.0, x, y), ParameterError);
  CHECK_THROWS_AS(quadratic_approx(q, -1.0, x, y), ParameterError);
}

TEST_CASE("quadratic surrogate at s = 1/L majorizes the objective") {
  const LassoInstance inst = gen_random_lasso(12, 8, 3, 0.05, 0.2, 5);
  const CompositeProblem p = make_problem(inst);
  const double s = 1.0 / inst.L;
  CounterRng rng(23);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_vec(rng, 8);
    const Vec y = random_vec(rng, 8);
    const double phi = objective(p, x);
    CHECK(quadratic_approx(p, s, x, y) >= phi - 1e-10 * (1.0 + std::abs(phi)));
  }
}

TEST_CASE("least-squares gradient passes central finite differences") {
  const LassoInstance inst = gen_random_lasso(10, 6, 2, 0.1, 0.1, 3);
  const CompositeProblem p = make_problem(inst);
  CounterRng rng(41);
  const Vec x = random_vec(rng, 6);
  const Vec grad = p.smooth->gradient(x);
  const double h = 1e-6 * (1.0 + x.norm());
  for (int i = 0; i < 100; ++i) {
    Vec u = random_vec(rng, 6);
    u /= u.norm();
    const double fd = (p.smooth->value(x + h * u) - p.smooth->value(x - h * u)) /
                      (2.0 * h);
    CHECK(std::abs(fd - grad.dot(u)) <= 1e-5);
  }
}

TEST_CASE("zero nonsmooth part makes the objective equal f bit-for-bit") {
  const CompositeProblem q = half_norm_sq(4);
  CounterRng rng(9);
  for (int i = 0; i < 20; ++i) {
    const Vec x = random_vec(rng, 4);
    CHECK(objective(q, x) == q.smooth->value(x));
  }
}

TEST_CASE("l1 oracle value, prox, and negative-weight guard") {
  const L1Norm g(0.25);
  Vec x(3);
  x << 1.0, -2.0, 0.5;
  CHECK(g.value(x) == doctest::Approx(0.25 * 3.5).epsilon(1e-15));
  CHECK(g.lambda() == 0.25);
  // scaled_prox(t, z) must be the soft threshold at tau = lambda * t.
  const Vec via_oracle = g.scaled_prox(2.0, x);
  const Vec direct = soft_threshold(x, 0.5);
  CHECK((via_oracle - direct).norm() == 0.0);
  CHECK_THROWS_AS(L1Norm(-0.1), ParameterError);
}

TEST_CASE("least-squares oracle rejects mismatched shapes") {
  Mat A(3, 2);
  A.setZero();
  Vec b(2);
  b.setZero();
  CHECK_THROWS_AS(LeastSquaresOracle(A, b, 1.0), DimensionError);
}
