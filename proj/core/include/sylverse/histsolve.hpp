#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sylverse/matcore.hpp"
#include "sylverse/problem.hpp"

namespace sylverse {

enum class SideSelector { A_side, B_side };
enum class HistoryOrdering { standard, reversed };

// Clock-indexed collection of system vectors. Indices 0..M-1 hold the
// evolution snapshots, indices M..M+R-1 the padding copies of the final
// state. normSq carries the squared norm of the whole collection (or, for
// the LCHS route, its closed-form counterpart).
struct HistoryState {
  int M = 0;
  int R = 0;
  std::vector<CVector> blocks;
  double normSq = 0.0;
  HistoryOrdering ordering = HistoryOrdering::standard;
};

// The block-bidiagonal system: identity diagonal, -V on the subdiagonal for
// rows 1..M and -I for rows M+1..M+R-1. The static case has one shared
// stepper V = sum_{k<=K} (Yh)^k / k!; the time-dependent case stores V_1..V_M.
// assembled is the dense matrix when (M+R)N <= 4096, empty otherwise.
struct BlockLinearSystem {
  int M = 0;
  int R = 0;
  int N = 0;
  double h = 0.0;
  int K = 0;
  std::vector<CMatrix> steppers;
  CMatrix assembled;
  CVector rhs;
};

struct ConditionCertificate {
  int M = 0, R = 0, K = 0;
  double normA = 0.0;
  double normAinv = 0.0;
  double kappa = 0.0;
  double rowSumBound = 0.0;
  double colSumBound = 0.0;
  double paperBound = 0.0;
  bool pass = false;
};

// Step count, padding count and truncation order used when the caller does
// not override them: M = ceil(t*max(a,b)), R = ceil(max(a,b)*d/c), both at
// least 1, and the smallest K with 2e^2 c h/(K+1)! <= eps/(10(M+R)).
int default_M(const MatrixODEProblem& p);
int default_R(const MatrixODEProblem& p);
int default_K(const MatrixODEProblem& p, int M, int R);

// Assembles the system for the chosen side. Requires M, R >= 1 and the step
// rule a*h <= 1 (b*h <= 1 for the B side); violating it raises
// PreconditionError suggesting M = ceil(t*a). rhs carries phi (or psi) in
// clock block 0.
BlockLinearSystem build_system(const MatrixODEProblem& p, SideSelector which, int M,
                               int R, int K);

// Solves the system for the history of x_in. Within the dense cap this goes
// through pivoted elimination on the assembled matrix; above it, through the
// mathematically identical forward recursion.
HistoryState solve_history(const BlockLinearSystem& sys, const CVector& x_in);

// All blocks of the dense inverse, indexed [row][col]. Requires the
// assembled matrix ((M+R)N <= 4096).
std::vector<std::vector<CMatrix>> invert_blocks(const BlockLinearSystem& sys);

// Measures ||A||, ||A^{-1}|| and kappa of the assembled system and compares
// against the analytic budget
//   paperBound = 1 + sum_{m=1}^M ||e^{hmY}|| + R max_s ||e^{sY}|| + (M+R) eps'
// where eps' is the explicit stepper sequence-error bound. pass requires
// normAinv <= paperBound and normA <= 1 + e.
ConditionCertificate certify_condition(const BlockLinearSystem& sys,
                                       const MatrixODEProblem& p, SideSelector which);

// (||assembled block matrix||, ||matrix of block norms||); the first never
// exceeds the second.
std::pair<double, double> block_norm_bound(
    const std::vector<std::vector<CMatrix>>& blocks);

// Solves the shifted system for Y - xi*I and returns the shifted history
// together with the diagonal weights e^{h*min(m,M)*xi} whose entrywise
// application recovers the unshifted history up to truncation differences.
std::pair<HistoryState, std::vector<double>> precondition(const MatrixODEProblem& p,
                                                          SideSelector which, int M,
                                                          int R, int K);

// {"M":,"R":,"K":,"normA":,"normAinv":,"kappa":,"paperBound":,"pass":}
std::string certificate_json(const ConditionCertificate& cert);

}  // namespace sylverse
