#pragma once

#include <string>

#include "sylverse/histsolve.hpp"
#include "sylverse/problem.hpp"

namespace sylverse {

// Scalar functionals that drive the cost formulas: exponential-envelope
// integrals of the log-norm bounds and their operator/state-norm analogues.
struct LFunctionals {
  double Lcal = 0.0;     // max over sides of int_0^t e^{2 s xi} ds + (d/c) e^{2 t xi}
  double L2 = 0.0;       // geometric mean of the two side factors above
  double Ltilde1 = 0.0;  // max over sides of int ||e^{sY}|| ds + (d/c) max_s ||e^{sY}||
  double Ltilde2 = 0.0;  // geometric mean of the state-resolved square integrals
  double maxExp = 0.0;   // max over sides and s in [0,t] of ||e^{sY}||
};

// History state whose blocks are the exact evolution snapshots e^{(tm/M)Y} x
// (padding blocks hold e^{tY} x) computed through the shifted generator
// Y - xi I and reweighted by e^{(tm/M) xi}. normSq is the closed-form
// normalization constant of that preparation, not the measured block norm.
HistoryState lchs_history(const MatrixODEProblem& p, SideSelector which, int M,
                          int R);

// M and R are accepted for interface parity with the history builders; the
// functionals themselves are grid-free.
LFunctionals compute_L_functionals(const MatrixODEProblem& p, int M, int R,
                                   double quadTol);

std::string functional_report_json(const LFunctionals& f, double quadTol);

}  // namespace sylverse
