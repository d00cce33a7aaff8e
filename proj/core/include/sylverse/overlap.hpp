#pragma once

#include <complex>
#include <map>
#include <string>

#include "sylverse/histsolve.hpp"
#include "sylverse/problem.hpp"

namespace sylverse {

enum class EntryRoute { linear_systems, lchs };

// Clock-diagonal operator: one fixed block per evolution step and one per
// padding step. lambda models the block-encoding normalization constant.
struct ClockBlockOperator {
  int M = 0;
  int R = 0;
  CMatrix perStepBlock;  // n x n kernel integral over one step (or its Taylor form)
  CMatrix paddingBlock;  // n x n, D/R
  double lambda = 0.0;   // max(c h e^2, d/R)
};

// int_0^h e^{tau A^dag} C e^{tau B} dtau by adaptive quadrature.
CMatrix exact_IC(const MatrixODEProblem& p, double h, double tol);

// Truncated double Taylor sum of the same integral; requires
// h <= min(1/a, 1/b).
CMatrix taylor_IC(const MatrixODEProblem& p, double h, int K);

ClockBlockOperator build_clock_operator(const MatrixODEProblem& p, int M, int R,
                                        int K);

// <phi | X(t) | psi> through the history-state overlap identity. The route
// selects how the two histories are produced; the clock operator is the
// truncated kernel in both cases.
Complex estimate_entry(const MatrixODEProblem& p, int M, int R, int K,
                       EntryRoute route);

// Equal thirds of eps scaled by the normalization constants that multiply
// each error source: keys "hist", "overlap" (both c * Ltilde2) and
// "truncation" (mu * Ltilde2).
std::map<std::string, double> error_budget(const MatrixODEProblem& p, int M, int R);

std::string entry_report_json(const MatrixODEProblem& p, int M, int R, int K,
                              EntryRoute route);

}  // namespace sylverse
