#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "proxrate/prox.hpp"

namespace proxrate {

enum class Variant {
  ista,
  fista_canonical,
  fista_gradient_correction,
  fista_implicit_velocity,
};

struct SolverConfig {
  double s = 0.0;          // step size, > 0
  double r = 2.0;          // momentum parameter, >= 2 for FISTA variants
  long max_iters = 1000;   // iteration budget (records 0..max_iters emitted)
  double stop_eps = 0.0;   // early stop when ||G_s|| < stop_eps; 0 disables
  Variant variant = Variant::ista;

  void validate() const {
    if (s <= 0.0) throw ParameterError("SolverConfig: s must be > 0");
    if (max_iters < 1) throw ParameterError("SolverConfig: max_iters must be >= 1");
    if (stop_eps < 0.0) throw ParameterError("SolverConfig: stop_eps must be >= 0");
    if (variant != Variant::ista && r < 2.0)
      throw ParameterError("SolverConfig: FISTA variants require r >= 2");
  }
};

// One emitted iteration. Record k is produced before the step to k+1, so a
// run with budget N emits records k = 0..N (N+1 rows) unless stopped early.
//  - x: the position iterate x_k.
//  - y: the point G_s was evaluated at (x_k for ISTA, y_k otherwise).
//  - v: phase-space velocity, pre-update value at step k (empty for the
//    ista / fista_canonical drivers).
//  - gs_prev: gradient-correction only, G_s at the previous evaluation point
//    (the cached subgradient the velocity update consumes).
struct IterateRecord {
  long k = 0;
  Vec x;
  Vec y;
  Vec v;
  Vec gs;
  Vec gs_prev;
  double gs_norm_sq = 0.0;
};

using RecordSink = std::function<void(const IterateRecord&)>;

// Snapshot of a phase-space driver taken when the position has just reached
// its step-k value: position is y_k (gradient-correction) or x_k
// (implicit-velocity); velocity is the value in effect at that moment (the
// pre-update v, i.e. v_{k-1} for gradient-correction, v_k for
// implicit-velocity); last_subgradient caches G_s at the previous evaluation
// point (gradient-correction only).
struct PhaseState {
  long k = 0;
  Vec position;
  Vec velocity;
  Vec last_subgradient;
};

inline PhaseState phase_state_from_record(Variant variant,
                                          const IterateRecord& rec) {
  PhaseState st;
  st.k = rec.k;
  st.velocity = rec.v;
  if (variant == Variant::fista_gradient_correction) {
    st.position = rec.y;
    st.last_subgradient = rec.gs_prev;
  } else if (variant == Variant::fista_implicit_velocity) {
    st.position = rec.x;
  } else {
    throw ParameterError("phase_state_from_record: not a phase-space variant");
  }
  return st;
}

struct RunSummary {
  long rows = 0;                   // records emitted
  std::optional<long> stop_index;  // first k with ||G_s|| < stop_eps
  bool diverged = false;           // a non-finite iterate appeared
  Vec final_x;                     // last finite position iterate
};

namespace detail {

inline bool stop_hit(const SolverConfig& cfg, double gs_norm_sq) {
  return cfg.stop_eps > 0.0 && std::sqrt(gs_norm_sq) < cfg.stop_eps;
}

}  // namespace detail

// x_k = x_{k-1} - s G_s(x_{k-1}), i.e. x_k = P_s(x_{k-1}) with the prox
// output taken verbatim as the next iterate.
inline RunSummary ista_run(const CompositeProblem& p, const SolverConfig& cfg,
                           const Vec& x0, const RecordSink& emit) {
  cfg.validate();
  p.check_dim(x0, "ista_run");
  RunSummary sum;
  Vec x = x0;
  sum.final_x = x;
  for (long k = 0; k <= cfg.max_iters; ++k) {
    if (!x.allFinite()) {
      sum.diverged = true;
      return sum;
    }
    sum.final_x = x;
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.y = x;
    const Vec step = proximal_step(p, cfg.s, x);
    rec.gs = (x - step) / cfg.s;
    rec.gs_norm_sq = rec.gs.squaredNorm();
    emit(rec);
    ++sum.rows;
    if (detail::stop_hit(cfg, rec.gs_norm_sq)) {
      sum.stop_index = k;
      return sum;
    }
    if (k < cfg.max_iters) x = step;
  }
  return sum;
}

// x_k = y_{k-1} - s G_s(y_{k-1}); y_k = x_k + (k-1)/(k+r) (x_k - x_{k-1}).
// The momentum coefficient is computed exactly as written, with no
// reassociation, so a directly coded accelerated reference matches
// bit-for-bit when the prox is the identity.
inline RunSummary fista_canonical_run(const CompositeProblem& p,
                                      const SolverConfig& cfg, const Vec& x0,
                                      const RecordSink& emit) {
  cfg.validate();
  p.check_dim(x0, "fista_canonical_run");
  RunSummary sum;
  Vec x = x0;
  Vec y = x0;
  sum.final_x = x;
  for (long k = 0; k <= cfg.max_iters; ++k) {
    if (!x.allFinite() || !y.allFinite()) {
      sum.diverged = true;
      return sum;
    }
    sum.final_x = x;
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.y = y;
    const Vec step = proximal_step(p, cfg.s, y);
    rec.gs = (y - step) / cfg.s;
    rec.gs_norm_sq = rec.gs.squaredNorm();
    emit(rec);
    ++sum.rows;
    if (detail::stop_hit(cfg, rec.gs_norm_sq)) {
      sum.stop_index = k;
      return sum;
    }
    if (k < cfg.max_iters) {
      const long kk = k + 1;
      const double c =
          (static_cast<double>(kk) - 1.0) / (static_cast<double>(kk) + cfg.r);
      y = step + c * (step - x);
      x = step;
    }
  }
  return sum;
}

// Position/velocity form whose position sequence is y_k:
//   y_k = y_{k-1} + sqrt(s) v_{k-1}
//   v_k = [k v_{k-1} - sqrt(s)((k+r+1) G_s(y_k) - k G_s(y_{k-1}))
//          - k sqrt(s) G_s(y_k)] / (k+r+1)
// started from v_0 = -sqrt(s) G_s(y_0). The x_k reported at record k is the
// prox output at y_{k-1}, which coincides with the canonical x_k.
inline RunSummary fista_gradient_correction_run(const CompositeProblem& p,
                                                const SolverConfig& cfg,
                                                const Vec& y0,
                                                const RecordSink& emit) {
  cfg.validate();
  p.check_dim(y0, "fista_gradient_correction_run");
  RunSummary sum;
  const double sq = std::sqrt(cfg.s);
  Vec y = y0;
  if (!y.allFinite()) {
    sum.diverged = true;
    sum.final_x = y;
    return sum;
  }
  Vec prox_prev = proximal_step(p, cfg.s, y);
  Vec g_prev = (y - prox_prev) / cfg.s;
  Vec v = -sq * g_prev;
  sum.final_x = y;
  {
    IterateRecord rec;
    rec.k = 0;
    rec.x = y0;
    rec.y = y0;
    rec.v = v;
    rec.gs = g_prev;
    rec.gs_prev = g_prev;
    rec.gs_norm_sq = g_prev.squaredNorm();
    emit(rec);
    ++sum.rows;
    if (detail::stop_hit(cfg, rec.gs_norm_sq)) {
      sum.stop_index = 0;
      return sum;
    }
  }
  for (long k = 1; k <= cfg.max_iters; ++k) {
    const Vec ynext = y + sq * v;
    if (!ynext.allFinite()) {
      sum.diverged = true;
      return sum;
    }
    const Vec prox_k = proximal_step(p, cfg.s, ynext);
    const Vec gk = (ynext - prox_k) / cfg.s;
    const double kd = static_cast<double>(k);
    IterateRecord rec;
    rec.k = k;
    rec.x = prox_prev;  // prox output at y_{k-1} = canonical x_k
    rec.y = ynext;
    rec.v = v;          // v_{k-1}: velocity that produced y_k
    rec.gs = gk;
    rec.gs_prev = g_prev;
    rec.gs_norm_sq = gk.squaredNorm();
    sum.final_x = rec.x;
    emit(rec);
    ++sum.rows;
    if (detail::stop_hit(cfg, rec.gs_norm_sq)) {
      sum.stop_index = k;
      return sum;
    }
    v = (kd * v - sq * ((kd + cfg.r + 1.0) * gk - kd * g_prev) -
         kd * sq * gk) /
        (kd + cfg.r + 1.0);
    y = ynext;
    g_prev = gk;
    prox_prev = prox_k;
  }
  return sum;
}

// Position/velocity form whose position sequence is x_k:
//   y_k = x_k + (k-1)/(k+r) sqrt(s) v_k      (y_0 = x_0; recursion from k=1)
//   v_{k+1} = v_k - (r+1)/(k+r) v_k - sqrt(s) G_s(y_k)
//   x_{k+1} = x_k + sqrt(s) v_{k+1}
// started from v_0 = 0.
inline RunSummary fista_implicit_velocity_run(const CompositeProblem& p,
                                              const SolverConfig& cfg,
                                              const Vec& x0,
                                              const RecordSink& emit) {
  cfg.validate();
  p.check_dim(x0, "fista_implicit_velocity_run");
  RunSummary sum;
  const double sq = std::sqrt(cfg.s);
  Vec x = x0;
  Vec v = Vec::Zero(x0.size());
  sum.final_x = x;
  for (long k = 0; k <= cfg.max_iters; ++k) {
    if (!x.allFinite()) {
      sum.diverged = true;
      return sum;
    }
    sum.final_x = x;
    const double kd = static_cast<double>(k);
    Vec y;
    if (k == 0) {
      y = x;
    } else {
      const double c = (kd - 1.0) / (kd + cfg.r);
      y = x + c * (sq * v);
    }
    if (!y.allFinite()) {
      sum.diverged = true;
      return sum;
    }
    const Vec step = proximal_step(p, cfg.s, y);
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.y = y;
    rec.v = v;  // v_k: pre-update velocity
    rec.gs = (y - step) / cfg.s;
    rec.gs_norm_sq = rec.gs.squaredNorm();
    emit(rec);
    ++sum.rows;
    if (detail::stop_hit(cfg, rec.gs_norm_sq)) {
      sum.stop_index = k;
      return sum;
    }
    if (k < cfg.max_iters) {
      v = v - ((cfg.r + 1.0) / (kd + cfg.r)) * v - sq * rec.gs;
      x = x + sq * v;
    }
  }
  return sum;
}

inline RunSummary run_solver(const CompositeProblem& p, const SolverConfig& cfg,
                             const Vec& x0, const RecordSink& emit) {
  switch (cfg.variant) {
    case Variant::ista:
      return ista_run(p, cfg, x0, emit);
    case Variant::fista_canonical:
      return fista_canonical_run(p, cfg, x0, emit);
    case Variant::fista_gradient_correction:
      return fista_gradient_correction_run(p, cfg, x0, emit);
    case Variant::fista_implicit_velocity:
      return fista_implicit_velocity_run(p, cfg, x0, emit);
  }
  throw ParameterError("run_solver: unknown variant");
}

// First index k with ||G_s|| < eps given the per-record squared norms;
// absent when eps is 0 (stop disabled) or the threshold is never crossed.
inline std::optional<long> stop_criterion(const std::vector<double>& gs_norm_sq,
                                          double eps) {
  if (eps < 0.0) throw ParameterError("stop_criterion: eps must be >= 0");
  if (eps == 0.0) return std::nullopt;
  for (std::size_t i = 0; i < gs_norm_sq.size(); ++i)
    if (std::sqrt(gs_norm_sq[i]) < eps) return static_cast<long>(i);
  return std::nullopt;
}

// ceil(C * eps^(-2/3)) with a snap-to-integer guard so exact powers such as
// eps = 1e-3 do not round up from 100.0000000000000x to 101.
inline long long estimate_iterations(double eps, double calibration) {
  if (eps <= 0.0) throw ParameterError("estimate_iterations: eps must be > 0");
  if (calibration <= 0.0)
    throw ParameterError("estimate_iterations: calibration must be > 0");
  const double raw = calibration * std::pow(eps, -2.0 / 3.0);
  const double nearest = std::round(raw);
  if (std::abs(raw - nearest) <= 1e-9 * std::max(1.0, std::abs(raw)))
    return static_cast<long long>(nearest);
  return static_cast<long long>(std::ceil(raw));
}

}  // namespace proxrate
