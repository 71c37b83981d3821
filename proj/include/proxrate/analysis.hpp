#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "proxrate/solvers.hpp"

namespace proxrate {

// Bound requested at an index where the formula is undefined (e.g. k = 0 for
// the ISTA bounds, which start at k = 1).
struct UndefinedBoundError : ParameterError {
  using ParameterError::ParameterError;
};
// Bound requested outside the hypotheses under which it is claimed.
struct HypothesisError : ParameterError {
  using ParameterError::ParameterError;
};
// Iterative estimation failed to converge; carries the last estimate.
struct EstimationError : std::runtime_error {
  double last_estimate;
  EstimationError(const std::string& what, double est)
      : std::runtime_error(what), last_estimate(est) {}
};

// ---------------------------------------------------------------------------
// Lyapunov functions
// ---------------------------------------------------------------------------

// E(k) = s k (Phi(x_k) - Phi*) + 1/2 ||x_k - x*||^2.
inline double lyapunov_ista(long k, const Vec& x_k, const Vec& x_star,
                            double phi_gap, double s) {
  return s * static_cast<double>(k) * phi_gap +
         0.5 * (x_k - x_star).squaredNorm();
}

// E(k) = s k (k+r) (Phi(x_k) - Phi*) + 1/2 ||k (y_k - x_k) + r (y_k - x*)||^2.
// The displacement weight is the iteration index k; with that weight this
// value coincides (to rounding) with both phase-space forms below and obeys
// the per-step decrement bound fista_decrement_bound.
inline double lyapunov_fista(long k, const Vec& x_k, const Vec& y_k,
                             const Vec& x_star, double phi_gap, double s,
                             double r) {
  const double kd = static_cast<double>(k);
  return s * kd * (kd + r) * phi_gap +
         0.5 * (kd * (y_k - x_k) + r * (y_k - x_star)).squaredNorm();
}

// Phase-space Lyapunov forms, algebraic rewritings of lyapunov_fista:
//   gradient-correction:  s k (k+r) gap
//       + 1/2 ||sqrt(s) k v_{k-1} + r (y_k - x*) + s k G_s(y_{k-1})||^2
//   implicit-velocity:    s k (k+r) gap
//       + 1/2 ||sqrt(s) (k-1) v_k + r (x_k - x*)||^2
// `state` follows the mid-step snapshot convention of PhaseState.
inline double lyapunov_fista_phase(Variant variant, const PhaseState& state,
                                   const Vec& x_star, double phi_gap, double s,
                                   double r) {
  const double kd = static_cast<double>(state.k);
  const double sq = std::sqrt(s);
  if (variant == Variant::fista_gradient_correction) {
    if (state.last_subgradient.size() != state.position.size())
      throw ParameterError(
          "lyapunov_fista_phase: gradient-correction state needs "
          "last_subgradient");
    const Vec mix = sq * kd * state.velocity + r * (state.position - x_star) +
                    s * kd * state.last_subgradient;
    return s * kd * (kd + r) * phi_gap + 0.5 * mix.squaredNorm();
  }
  if (variant == Variant::fista_implicit_velocity) {
    const Vec mix =
        sq * (kd - 1.0) * state.velocity + r * (state.position - x_star);
    return s * kd * (kd + r) * phi_gap + 0.5 * mix.squaredNorm();
  }
  throw ParameterError("lyapunov_fista_phase: not a phase-space variant");
}

// ---------------------------------------------------------------------------
// Per-step decrement bounds (upper bounds on E(k+1) - E(k) for the step
// leaving index k; `gs_norm_sq` is ||G_s||^2 at step k's evaluation point,
// `gap_next` is Phi(x_{k+1}) - Phi*)
// ---------------------------------------------------------------------------

// Aggressive ISTA target -(3 k s^2 / 2) ||G_s(x_k)||^2. Real runs violate it
// once k grows; it is retained verbatim because the acceptance suite checks
// it as stated (see the known-failing certificate criterion).
inline double ista_decrement_bound_strong(long k, double s,
                                          double gs_norm_sq) {
  return -1.5 * static_cast<double>(k) * s * s * gs_norm_sq;
}

// Certified ISTA decrement -(s^2/2) [(k+1)(2 - sL) - 1] ||G_s(x_k)||^2,
// which every run with 0 < s <= 1/L satisfies; equals -(k s^2 / 2) ||.||^2
// at s = 1/L.
inline double ista_decrement_bound_certified(long k, double s, double L,
                                             double gs_norm_sq) {
  const double kd = static_cast<double>(k);
  return -(s * s / 2.0) * ((kd + 1.0) * (2.0 - s * L) - 1.0) * gs_norm_sq;
}

// FISTA decrement -(s^2 (k+r)^2 / 2)(1 - sL) ||G_s(y_k)||^2
//                 - s [(r-2) k + r^2 - r - 1] (Phi(x_{k+1}) - Phi*).
inline double fista_decrement_bound(long k, double s, double r, double L,
                                    double gs_norm_sq, double gap_next) {
  const double kd = static_cast<double>(k);
  const double quad =
      (s * s * (kd + r) * (kd + r) / 2.0) * (1.0 - s * L) * gs_norm_sq;
  const double lin = s * ((r - 2.0) * kd + r * r - r - 1.0) * gap_next;
  return -quad - lin;
}

// decrement > bound + tol (1 + E_prev) + extra_slack ?
inline bool decrement_violates(double e_prev, double e_curr, double bound,
                               double tol, double extra_slack = 0.0) {
  return (e_curr - e_prev) > bound + tol * (1.0 + e_prev) + extra_slack;
}

struct LyapunovStep {
  long k = 0;          // index of the later iterate: decrement = E(k) - E(k-1)
  double value = 0.0;  // E(k)
  double decrement = 0.0;
  double bound = 0.0;  // certified upper bound on the decrement
  bool violation = false;
};

// ---------------------------------------------------------------------------
// Rate bound evaluators
// ---------------------------------------------------------------------------

// Phi(x_k) - Phi* <= ||x0 - x*||^2 / (2 s k), k >= 1.
inline double ista_objective_bound(long k, double s, double init_dist_sq) {
  if (k < 1)
    throw UndefinedBoundError("ista_objective_bound: defined for k >= 1");
  if (s <= 0.0) throw ParameterError("ista_objective_bound: s must be > 0");
  return init_dist_sq / (2.0 * s * static_cast<double>(k));
}

// min_{0<=i<=k} ||G_s(x_i)||^2 <= 2 ||x0 - x*||^2 / (3 s^2 k (k+1)), k >= 1.
inline double ista_gradmin_bound(long k, double s, double init_dist_sq) {
  if (k < 1)
    throw UndefinedBoundError("ista_gradmin_bound: defined for k >= 1");
  if (s <= 0.0) throw ParameterError("ista_gradmin_bound: s must be > 0");
  const double kd = static_cast<double>(k);
  return 2.0 * init_dist_sq / (3.0 * s * s * kd * (kd + 1.0));
}

// Phi(x_k) - Phi* <= r^2 ||x0 - x*||^2 / (2 s (k+1)(k+r+1)), k >= 0.
inline double fista_objective_bound(long k, double s, double r,
                                    double init_dist_sq) {
  if (k < 0)
    throw UndefinedBoundError("fista_objective_bound: defined for k >= 0");
  if (s <= 0.0) throw ParameterError("fista_objective_bound: s must be > 0");
  const double kd = static_cast<double>(k);
  return r * r * init_dist_sq / (2.0 * s * (kd + 1.0) * (kd + r + 1.0));
}

// min_{0<=i<=k} ||G_s(y_i)||^2 <=
//   6 r^2 ||x0 - x*||^2 / (s^2 (1 - sL) (k+1) (2k^2 + (6r+1)k + 6r^2)),
// claimed only for 0 < s < 1/L strictly (the bound degenerates as sL -> 1).
inline double fista_gradmin_bound(long k, double s, double r, double L,
                                  double init_dist_sq) {
  if (k < 0)
    throw UndefinedBoundError("fista_gradmin_bound: defined for k >= 0");
  if (s <= 0.0) throw ParameterError("fista_gradmin_bound: s must be > 0");
  if (s * L >= 1.0)
    throw HypothesisError(
        "fista_gradmin_bound: requires s < 1/L strictly (s*L = " +
        std::to_string(s * L) + ")");
  const double kd = static_cast<double>(k);
  const double poly = 2.0 * kd * kd + (6.0 * r + 1.0) * kd + 6.0 * r * r;
  return 6.0 * r * r * init_dist_sq /
         (s * s * (1.0 - s * L) * (kd + 1.0) * poly);
}

struct BoundReport {
  long k = 0;
  double observed = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};

inline BoundReport make_bound_report(long k, double observed, double bound,
                                     double tol) {
  BoundReport rep;
  rep.k = k;
  rep.observed = observed;
  rep.bound = bound;
  rep.satisfied = observed <= bound * (1.0 + tol) + tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Empirical rate helpers
// ---------------------------------------------------------------------------

inline std::vector<double> running_min(const std::vector<double>& in) {
  std::vector<double> out;
  out.reserve(in.size());
  double cur = std::numeric_limits<double>::infinity();
  for (double v : in) {
    cur = std::min(cur, v);
    out.push_back(cur);
  }
  return out;
}

// Least-squares slope of log(value) against log(k) over k in [k_min, k_max].
// Requires at least 10 in-range points, all strictly positive (a zero or
// negative value means the trace hit the floating-point floor and no rate is
// defined).
inline double loglog_slope(const std::vector<long>& ks,
                           const std::vector<double>& values, long k_min,
                           long k_max) {
  if (ks.size() != values.size())
    throw ParameterError("loglog_slope: ks/values length mismatch");
  if (k_min >= k_max) throw ParameterError("loglog_slope: need k_min < k_max");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < k_min || ks[i] > k_max) continue;
    if (!(values[i] > 0.0))
      throw ParameterError(
          "loglog_slope: nonpositive value at k = " + std::to_string(ks[i]) +
          "; rate undefined");
    lx.push_back(std::log(static_cast<double>(ks[i])));
    ly.push_back(std::log(values[i]));
  }
  if (lx.size() < 10)
    throw ParameterError("loglog_slope: fewer than 10 points in [" +
                         std::to_string(k_min) + ", " + std::to_string(k_max) +
                         "]");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

// Negative gaps within -1e-12 (1 + |Phi*|) are reference-minimizer rounding
// and clamp to zero; anything more negative means the stored reference is not
// actually the minimizer and is flagged for the caller to surface.
struct ClampedGap {
  double gap = 0.0;
  bool reference_failure = false;
};

inline ClampedGap clamp_phi_gap(double raw_gap, double phi_star) {
  ClampedGap out;
  if (raw_gap >= 0.0) {
    out.gap = raw_gap;
    return out;
  }
  out.gap = 0.0;
  out.reference_failure = raw_gap < -1e-12 * (1.0 + std::abs(phi_star));
  return out;
}

}  // namespace proxrate
