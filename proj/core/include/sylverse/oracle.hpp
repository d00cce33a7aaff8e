#pragma once

#include "sylverse/matcore.hpp"
#include "sylverse/problem.hpp"

namespace sylverse {

enum class SolveMethod { closed_form, quadrature, ode_vectorized, dyson };

// One evaluation of the solution: the full matrix X(t) and the contracted
// entry <phi| X(t) |psi>, tagged with the method that produced it.
struct SolutionSample {
  double t = 0.0;
  CMatrix X;
  Complex entry{0.0, 0.0};
  SolveMethod method = SolveMethod::quadrature;
};

// Evaluates the closed form
//   X(t) = int_0^t ds exp((t-s)A^dagger) C exp((t-s)B) + exp(tA^dagger) D exp(tB)
// with quad_integrate at tolerance tol and expm at tol/10.
SolutionSample solve_quadrature(const MatrixODEProblem& p, double tol);

// Integrates d/dt X = A^dagger X + X B + C from X(0) = D with an embedded
// Runge-Kutta 4(5) pair and adaptive steps targeting local error tol. Step
// underflow raises StiffnessError advising the quadrature route.
SolutionSample solve_ode(const MatrixODEProblem& p, double tol);

// Same integrator with coefficients interpolated from the sample grid.
SolutionSample solve_ode(const TimeDepProblem& p, double tol);

// || A^dagger Xcand + Xcand B + C ||, the stationary-equation residual.
double fixed_point_residual(const MatrixODEProblem& p, const CMatrix& Xcand);

}  // namespace sylverse
