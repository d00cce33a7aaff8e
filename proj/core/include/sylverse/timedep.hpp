#pragma once

#include <complex>

#include "sylverse/histsolve.hpp"
#include "sylverse/problem.hpp"

namespace sylverse {

// Truncated-Dyson evaluator for the right-multiplication transition matrices
// dW(t,s)/dt = W(t,s) Y(t), W(s,s) = I. Substeps never exceed 1/bound and
// split at the sample-grid breakpoints, so the collocation on innerGrid
// Gauss nodes integrates the piecewise-linear data exactly.
struct Propagator {
  TimeDepProblem problem;
  SideSelector side = SideSelector::A_side;
  int K = 10;         // Dyson truncation order
  int innerGrid = 10; // Gauss nodes per substep
};

// W(t1, t0) for 0 <= t0 <= t1 <= problem.t.
CMatrix propagate(const Propagator& prop, double t1, double t0);

// Standard-order blocks: x_0 = start state, x_m = V_m x_{m-1} where V_m is
// the order-K step over [t_{M-m}, t_{M-m+1}] (the first stepper covers the
// last time window), padding blocks repeat x_M. The reversed ordering flips
// the block indices so the first R blocks hold the final-time state.
HistoryState timedep_history(const TimeDepProblem& p, SideSelector side, int M,
                             int R, int K, HistoryOrdering ordering);

// Equidistant-grid count G = ceil(h^2 maxDeriv / epsBe) with the derivative
// bound e^2 ((a+b) c + derivC); at least 1.
int riemann_points(const TimeDepProblem& p, int M, double epsBe);

// Left-endpoint Riemann sum of
// int_0^h dtau W_A^dag(t_{m+1}, t_m+tau) C(t_m+tau) W_B(t_{m+1}, t_m+tau)
// on G equidistant points, transition matrices built incrementally by
// composition.
CMatrix riemann_IC(const TimeDepProblem& p, int m, int M, int K, int G);

// <phi| X(t) |psi> through the reverse-order history overlap with the
// per-step kernels above; the grid count comes from riemann_points at
// epsBe = p.eps.
Complex solve_timedep_entry(const TimeDepProblem& p, int M, int R, int K);

// Certificate for the time-dependent block system (A side): measured norms
// by SVD against the row/column bounds assembled from the L^1 transition
// functionals, R max_s ||W(s,0)|| and the Dyson sequence slack.
ConditionCertificate certify_condition_timedep(const TimeDepProblem& p, int M,
                                               int R, int K);

}  // namespace sylverse
