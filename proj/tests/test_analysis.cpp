#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "proxrate/analysis.hpp"
#include "proxrate/instances.hpp"
#include "proxrate/solvers.hpp"

using namespace proxrate;

namespace {

struct SolvedLasso {
  LassoInstance inst;
  CompositeProblem problem;
  Reference ref;
};

// The m=50, d=100, seed-0 instance with its oracle minimizer; shared by the
// per-step decrement tests below.
const SolvedLasso& seed0() {
  static const SolvedLasso cached = [] {
    SolvedLasso s;
    s.inst = gen_random_lasso(50, 100, 5, 0.01, 0.1, 0);
    s.problem = make_problem(s.inst);
    s.ref = solve_reference(s.problem, 1e-10);
    return s;
  }();
  return cached;
}

struct RunArrays {
  std::vector<double> e;    // Lyapunov values per record
  std::vector<double> gs2;  // squared subgradient norms per record
  std::vector<double> gap;  // clamped objective gaps per record
};

RunArrays run_with_lyapunov(const SolvedLasso& sl, const SolverConfig& cfg) {
  RunArrays out;
  run_solver(sl.problem, cfg, Vec::Zero(sl.problem.dimension),
             [&](const IterateRecord& rec) {
               const double gap =
                   clamp_phi_gap(objective(sl.problem, rec.x) - sl.ref.phi_star,
                                 sl.ref.phi_star)
                       .gap;
               double e;
               if (cfg.variant == Variant::ista)
                 e = lyapunov_ista(rec.k, rec.x, sl.ref.x_star, gap, cfg.s);
               else
                 e = lyapunov_fista(rec.k, rec.x, rec.y, sl.ref.x_star, gap,
                                    cfg.s, cfg.r);
               out.e.push_back(e);
               out.gs2.push_back(rec.gs_norm_sq);
               out.gap.push_back(gap);
             });
  return out;
}

}  // namespace

TEST_CASE("plain Lyapunov value: k = 0 term and exact minimum") {
  Vec x0(2), x_star(2);
  x0 << 3.0, 4.0;
  x_star << 0.0, 0.0;
  CHECK(lyapunov_ista(0, x0, x_star, 7.0, 0.1) ==
        doctest::Approx(12.5).epsilon(1e-15));
  CHECK(lyapunov_ista(5, x_star, x_star, 0.0, 0.1) == 0.0);
}

TEST_CASE("accelerated Lyapunov value: k = 0 term and exact minimum") {
  Vec x0(2), x_star(2);
  x0 << 1.0, 2.0;
  x_star << 0.0, 0.0;
  // y0 = x0 makes the displacement term vanish, leaving (r^2/2) ||x0 - x*||^2.
  CHECK(lyapunov_fista(0, x0, x0, x_star, 3.0, 0.1, 2.0) ==
        doctest::Approx(10.0).epsilon(1e-15));
  CHECK(lyapunov_fista(4, x_star, x_star, x_star, 0.0, 0.1, 2.0) == 0.0);
}

TEST_CASE("non-accelerated decrement satisfies the certified coefficient") {
  const SolvedLasso& sl = seed0();
  for (double frac : {1.0, 0.5}) {
    SolverConfig cfg;
    cfg.s = frac / sl.inst.L;
    cfg.max_iters = 3000;
    const RunArrays run = run_with_lyapunov(sl, cfg);
    long violations = 0;
    for (std::size_t k = 0; k + 1 < run.e.size(); ++k) {
      const double bound = ista_decrement_bound_certified(
          static_cast<long>(k), cfg.s, sl.inst.L, run.gs2[k]);
      if (decrement_violates(run.e[k], run.e[k + 1], bound, 1e-10))
        ++violations;
      // Monotone non-increase is implied by the (nonpositive) bound.
      CHECK(run.e[k + 1] <= run.e[k] + 1e-10 * (1.0 + run.e[k]));
    }
    CHECK(violations == 0);
  }
}

// The aggressive per-step target -(3 k s^2 / 2) ||G_s(x_k)||^2 is stated for
// every step of a non-accelerated run. Real runs break it once the gap term
// s * gap(x_k) stops dominating the k-weighted demand (first violation
// around k ~ 10-40 on this instance), so this check is expected to fail;
// the certified coefficient verified above is the provable replacement.
TEST_CASE("non-accelerated decrement meets the aggressive k-weighted target") {
  const SolvedLasso& sl = seed0();
  SolverConfig cfg;
  cfg.s = 1.0 / sl.inst.L;
  cfg.max_iters = 3000;
  const RunArrays run = run_with_lyapunov(sl, cfg);
  long violations = 0;
  long first_violation = -1;
  for (std::size_t k = 0; k + 1 < run.e.size(); ++k) {
    const double bound =
        ista_decrement_bound_strong(static_cast<long>(k), cfg.s, run.gs2[k]);
    if (decrement_violates(run.e[k], run.e[k + 1], bound, 1e-10)) {
      ++violations;
      if (first_violation < 0) first_violation = static_cast<long>(k);
    }
  }
  INFO("violations = " << violations << ", first at k = " << first_violation);
  CHECK(violations == 0);
}

TEST_CASE("accelerated decrement satisfies its two-term certified bound") {
  const SolvedLasso& sl = seed0();
  SolverConfig cfg;
  cfg.s = 0.9 / sl.inst.L;
  cfg.r = 2.0;
  cfg.max_iters = 1000;
  cfg.variant = Variant::fista_canonical;
  const RunArrays run = run_with_lyapunov(sl, cfg);
  long violations = 0;
  for (std::size_t k = 0; k + 1 < run.e.size(); ++k) {
    const double bound =
        fista_decrement_bound(static_cast<long>(k), cfg.s, cfg.r, sl.inst.L,
                              run.gs2[k], run.gap[k + 1]);
    if (decrement_violates(run.e[k], run.e[k + 1], bound, 1e-10)) ++violations;
    CHECK(run.e[k + 1] <= run.e[k] + 1e-10 * (1.0 + run.e[k]));
  }
  CHECK(violations == 0);
}

TEST_CASE("phase-space Lyapunov forms at k = 0 match their reduced values") {
  Vec x0(2), x_star(2), g0(2);
  x0 << 1.0, -1.0;
  x_star << 0.25, 0.5;
  g0 << 0.3, -0.2;
  const double s = 0.04;
  const double r = 2.0;
  const double dist_sq = (x0 - x_star).squaredNorm();

  PhaseState iv;
  iv.k = 0;
  iv.position = x0;
  iv.velocity = Vec::Zero(2);
  CHECK(lyapunov_fista_phase(Variant::fista_implicit_velocity, iv, x_star, 0.0,
                             s, r) ==
        doctest::Approx(0.5 * r * r * dist_sq).epsilon(1e-14));

  PhaseState gc;
  gc.k = 0;
  gc.position = x0;
  gc.velocity = -std::sqrt(s) * g0;
  gc.last_subgradient = g0;
  // Every k-weighted term vanishes at k = 0 regardless of the velocity.
  CHECK(lyapunov_fista_phase(Variant::fista_gradient_correction, gc, x_star,
                             0.0, s, r) ==
        doctest::Approx(0.5 * r * r * dist_sq).epsilon(1e-14));

  CHECK_THROWS_AS(
      lyapunov_fista_phase(Variant::ista, iv, x_star, 0.0, s, r),
      ParameterError);
  PhaseState incomplete;
  incomplete.k = 1;
  incomplete.position = x0;
  incomplete.velocity = Vec::Zero(2);
  CHECK_THROWS_AS(lyapunov_fista_phase(Variant::fista_gradient_correction,
                                       incomplete, x_star, 0.0, s, r),
                  ParameterError);
}

TEST_CASE("all three Lyapunov forms agree along a 1000-step run") {
  const SolvedLasso& sl = seed0();
  SolverConfig cfg;
  cfg.s = 0.9 / sl.inst.L;
  cfg.r = 2.0;
  cfg.max_iters = 1000;

  cfg.variant = Variant::fista_canonical;
  std::vector<double> e_canon;
  run_solver(sl.problem, cfg, Vec::Zero(100), [&](const IterateRecord& rec) {
    const double gap = clamp_phi_gap(objective(sl.problem, rec.x) -
                                         sl.ref.phi_star,
                                     sl.ref.phi_star)
                           .gap;
    e_canon.push_back(
        lyapunov_fista(rec.k, rec.x, rec.y, sl.ref.x_star, gap, cfg.s, cfg.r));
  });

  for (Variant v : {Variant::fista_gradient_correction,
                    Variant::fista_implicit_velocity}) {
    cfg.variant = v;
    std::size_t i = 0;
    run_solver(sl.problem, cfg, Vec::Zero(100), [&](const IterateRecord& rec) {
      const double gap = clamp_phi_gap(objective(sl.problem, rec.x) -
                                           sl.ref.phi_star,
                                       sl.ref.phi_star)
                             .gap;
      const double e = lyapunov_fista_phase(v, phase_state_from_record(v, rec),
                                            sl.ref.x_star, gap, cfg.s, cfg.r);
      REQUIRE(i < e_canon.size());
      CHECK(std::abs(e - e_canon[i]) <= 1e-8 * (1.0 + std::abs(e_canon[i])));
      ++i;
    });
  }
}

TEST_CASE("objective-gap ceiling for the non-accelerated method") {
  CHECK(ista_objective_bound(10, 0.1, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(ista_objective_bound(0, 0.1, 1.0), UndefinedBoundError);
  CHECK_THROWS_AS(ista_objective_bound(5, 0.0, 1.0), ParameterError);
}

TEST_CASE("subgradient-norm ceiling for the non-accelerated method") {
  CHECK(ista_gradmin_bound(1, 1.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(ista_gradmin_bound(0, 1.0, 1.0), UndefinedBoundError);
}

TEST_CASE("s = 1/L specializations coincide with their L-form expressions") {
  const double L = 3.7;
  const double D = 2.3;
  const double s = 1.0 / L;
  for (long k = 1; k <= 100; ++k) {
    const double obj_l = L * D / (2.0 * static_cast<double>(k));
    const double grad_l = 2.0 * L * L * D /
                          (3.0 * static_cast<double>(k) *
                           (static_cast<double>(k) + 1.0));
    CHECK(std::abs(ista_objective_bound(k, s, D) - obj_l) <= 1e-12 * obj_l);
    CHECK(std::abs(ista_gradmin_bound(k, s, D) - grad_l) <= 1e-12 * grad_l);
  }
}

TEST_CASE("objective-gap ceiling for the accelerated method") {
  CHECK(fista_objective_bound(0, 1.0, 2.0, 1.0) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // r=2, s=0.1, k=9: 4 / (2 * 0.1 * 10 * 12) = 1/6.
  CHECK(fista_objective_bound(9, 0.1, 2.0, 1.0) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(fista_objective_bound(-1, 1.0, 2.0, 1.0),
                  UndefinedBoundError);
}

TEST_CASE("subgradient-norm ceiling for the accelerated method") {
  // r=2, s=1, L=0.5 (so sL=0.5), k=0: 24 / (1 * 0.5 * 1 * 24) = 2.
  CHECK(fista_gradmin_bound(0, 1.0, 2.0, 0.5, 1.0) ==
        doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(fista_gradmin_bound(0, 1.0, 2.0, 1.0, 1.0), HypothesisError);
  CHECK_THROWS_AS(fista_gradmin_bound(0, 2.0, 2.0, 1.0, 1.0), HypothesisError);
  // The ceiling blows up toward the hypothesis boundary sL -> 1.
  CHECK(fista_gradmin_bound(0, 1.0, 2.0, 1.0 - 1e-9, 1.0) > 1e8);
}

TEST_CASE("decrement violation predicate applies tolerance and slack") {
  CHECK(!decrement_violates(10.0, 9.0, -0.5, 1e-10));
  CHECK(decrement_violates(10.0, 9.9, -0.5, 1e-10));
  CHECK(!decrement_violates(10.0, 9.9, -0.5, 1e-10, 0.5));
  // Tolerance scales with the previous value.
  CHECK(!decrement_violates(1e12, 1e12 - 0.4, -0.5, 1e-10));
}

TEST_CASE("bound reports mark observations above the tolerance envelope") {
  CHECK(make_bound_report(3, 0.5, 1.0, 1e-8).satisfied);
  CHECK(make_bound_report(3, 1.0 + 1e-9, 1.0, 1e-8).satisfied);
  CHECK(!make_bound_report(3, 1.1, 1.0, 1e-8).satisfied);
  const BoundReport rep = make_bound_report(7, 2.0, 1.0, 1e-8);
  CHECK(rep.k == 7);
  CHECK(rep.observed == 2.0);
  CHECK(rep.bound == 1.0);
}

TEST_CASE("running minimum is cumulative and non-increasing") {
  CHECK(running_min({3.0, 1.0, 2.0}) == std::vector<double>{3.0, 1.0, 1.0});
  CHECK(running_min({2.0, 2.0, 2.0}) == std::vector<double>{2.0, 2.0, 2.0});
  CHECK(running_min({5.0}) == std::vector<double>{5.0});
  CHECK(running_min({}).empty());
}

TEST_CASE("log-log slope recovers exact power laws") {
  std::vector<long> ks;
  std::vector<double> sq, cube, flat;
  for (long k = 1; k <= 2000; ++k) {
    const double kd = static_cast<double>(k);
    ks.push_back(k);
    sq.push_back(1.0 / (kd * kd));
    cube.push_back(1.0 / (kd * kd * kd));
    flat.push_back(0.375);
  }
  CHECK(loglog_slope(ks, sq, 100, 2000) ==
        doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(loglog_slope(ks, cube, 100, 2000) ==
        doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(loglog_slope(ks, flat, 100, 2000) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("log-log slope rejects degenerate windows and dead traces") {
  std::vector<long> ks;
  std::vector<double> vals;
  for (long k = 1; k <= 100; ++k) {
    ks.push_back(k);
    vals.push_back(1.0 / static_cast<double>(k));
  }
  CHECK_THROWS_AS(loglog_slope(ks, vals, 50, 50), ParameterError);
  CHECK_THROWS_AS(loglog_slope(ks, vals, 60, 40), ParameterError);
  CHECK_THROWS_AS(loglog_slope(ks, vals, 95, 100), ParameterError);  // < 10 pts
  std::vector<double> short_vals(50, 1.0);
  CHECK_THROWS_AS(loglog_slope(ks, short_vals, 1, 100), ParameterError);

  vals[72] = 0.0;  // k = 73 hits the floor
  try {
    loglog_slope(ks, vals, 1, 100);
    FAIL("expected a parameter error for the zero value");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("73") != std::string::npos);
  }
}

TEST_CASE("small negative gaps clamp to zero, larger ones flag the reference") {
  const ClampedGap tiny = clamp_phi_gap(-1e-13, 0.0);
  CHECK(tiny.gap == 0.0);
  CHECK(!tiny.reference_failure);
  const ClampedGap bad = clamp_phi_gap(-1e-6, 0.0);
  CHECK(bad.gap == 0.0);
  CHECK(bad.reference_failure);
  const ClampedGap pos = clamp_phi_gap(0.25, 123.0);
  CHECK(pos.gap == 0.25);
  CHECK(!pos.reference_failure);
  // The clamp window scales with |Phi*|.
  const ClampedGap scaled = clamp_phi_gap(-5e-11, 100.0);
  CHECK(!scaled.reference_failure);
}
