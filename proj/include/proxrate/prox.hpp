#pragma once

#include "proxrate/problem.hpp"

namespace proxrate {

// One proximal-gradient step of size s from y:
//   P_s(y) = scaled_prox(s, y - s * grad f(y)).
inline Vec proximal_step(const CompositeProblem& p, double s, const Vec& y) {
  if (s <= 0.0) throw ParameterError("proximal_step: s must be > 0");
  p.check_dim(y, "proximal_step");
  return p.nonsmooth->scaled_prox(s, y - s * p.smooth->gradient(y));
}

// The proximal subgradient G_s(y) = (y - P_s(y)) / s. Its norm is the
// stationarity measure every rate in this library is stated in: G_s(y) = 0
// iff y minimizes f + g.
inline Vec proximal_subgradient(const CompositeProblem& p, double s,
                                const Vec& y) {
  return (y - proximal_step(p, s, y)) / s;
}

// Same quantity when the prox output is already at hand (saves the second
// oracle evaluation inside solver loops).
inline Vec proximal_subgradient_from_step(double s, const Vec& y,
                                          const Vec& prox_out) {
  return (y - prox_out) / s;
}

// Report for the one-step descent inequality
//   Phi(y - s G_s(y)) <= Phi(x) + <G_s(y), y - x> - (s - s^2 L / 2) ||G_s(y)||^2
// which holds for every x, y whenever 0 < s <= 1/L. residual = rhs - lhs,
// so the inequality held iff residual >= -tol*(1+|lhs|); tol absorbs
// floating-point noise only, the inequality itself is exact.
struct KeyInequalityReport {
  double lhs = 0.0;            // Phi at the prox step from y
  double rhs = 0.0;
  double residual = 0.0;       // rhs - lhs; nonnegative when the bound holds
  double gs_norm_sq = 0.0;     // ||G_s(y)||^2 at the probe point
  bool outside_hypothesis = false;  // s > 1/L: no claim is made
  bool holds = false;
};

inline KeyInequalityReport check_key_inequality(const CompositeProblem& p,
                                                double s, const Vec& x,
                                                const Vec& y,
                                                double tol = 1e-10) {
  if (s <= 0.0) throw ParameterError("check_key_inequality: s must be > 0");
  p.check_dim(x, "check_key_inequality");
  p.check_dim(y, "check_key_inequality");
  const double L = p.smooth->lipschitz();
  KeyInequalityReport rep;
  rep.outside_hypothesis = s > 1.0 / L;
  const Vec step = proximal_step(p, s, y);
  const Vec g = proximal_subgradient_from_step(s, y, step);
  rep.gs_norm_sq = g.squaredNorm();
  rep.lhs = objective(p, step);
  rep.rhs = objective(p, x) + g.dot(y - x) -
            (s - s * s * L / 2.0) * rep.gs_norm_sq;
  rep.residual = rep.rhs - rep.lhs;
  rep.holds = rep.residual >= -tol * (1.0 + std::abs(rep.lhs));
  return rep;
}

}  // namespace proxrate
