#include "sylverse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sylverse/errors.hpp"

namespace sylverse {

namespace {

double expm_tol(double tol) { return std::clamp(tol / 10.0, 2e-15, 9e-3); }

double max_abs(const CMatrix& M) { return M.cwiseAbs().maxCoeff(); }

// Dormand-Prince 5(4) pair. The high-order row advances the solution; the
// difference against the embedded row drives the step controller.
template <typename Rhs>
CMatrix integrate_rk45(const Rhs& rhs, CMatrix X, double t_end, double tol) {
  if (t_end <= 0.0) return X;
  double s = 0.0;
  double hprop = t_end;
  const double hmin = 1e-14 * std::max(t_end, 1.0);

  while (s < t_end) {
    if (hprop < hmin)
      throw StiffnessError(
          "solve_ode: step size underflow, problem too stiff at this tolerance; "
          "use the quadrature route instead");
    double h = std::min(hprop, t_end - s);

    CMatrix k1 = rhs(s, X);
    CMatrix k2 = rhs(s + h / 5.0, X + (h / 5.0) * k1);
    CMatrix k3 = rhs(s + 3.0 * h / 10.0, X + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    CMatrix k4 = rhs(s + 4.0 * h / 5.0,
                     X + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    CMatrix k5 = rhs(s + 8.0 * h / 9.0,
                     X + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                              64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    CMatrix k6 = rhs(s + h, X + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                                     46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                                     5103.0 / 18656.0 * k5));
    CMatrix X5 = X + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                          125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
    CMatrix k7 = rhs(s + h, X5);
    CMatrix errm = h * ((35.0 / 384.0 - 5179.0 / 57600.0) * k1 +
                        (500.0 / 1113.0 - 7571.0 / 16695.0) * k3 +
                        (125.0 / 192.0 - 393.0 / 640.0) * k4 +
                        (-2187.0 / 6784.0 + 92097.0 / 339200.0) * k5 +
                        (11.0 / 84.0 - 187.0 / 2100.0) * k6 - (1.0 / 40.0) * k7);
    double err = max_abs(errm);
    double allow = tol * (h / t_end) * std::max(1.0, max_abs(X));
    if (err <= allow) {
      X = std::move(X5);
      s += h;
    }
    double fac = 0.9 * std::pow(allow / std::max(err, 1e-300), 0.2);
    hprop = h * std::clamp(fac, 0.2, 5.0);
  }
  return X;
}

SolutionSample finish(double t, CMatrix X, const CVector& phi, const CVector& psi,
                      SolveMethod method) {
  SolutionSample out;
  out.t = t;
  out.X = std::move(X);
  out.entry = (phi.adjoint() * out.X * psi)(0, 0);
  out.method = method;
  return out;
}

}  // namespace

SolutionSample solve_quadrature(const MatrixODEProblem& p, double tol) {
  if (!(tol > 0.0))
    throw PreconditionError("solve_quadrature: tol must be positive");
  double et = expm_tol(tol);
  CMatrix Ad = p.A.adjoint();
  double t = p.t;
  auto kernel = [&](double s) {
    return CMatrix(expm((t - s) * Ad, et) * p.C * expm((t - s) * p.B, et));
  };
  CMatrix X = quad_integrate(kernel, 0.0, t, tol) +
              expm(t * Ad, et) * p.D * expm(t * p.B, et);
  return finish(t, std::move(X), p.phi, p.psi, SolveMethod::quadrature);
}

SolutionSample solve_ode(const MatrixODEProblem& p, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("solve_ode: tol must be positive");
  CMatrix Ad = p.A.adjoint();
  auto rhs = [&](double, const CMatrix& X) { return CMatrix(Ad * X + X * p.B + p.C); };
  CMatrix X = integrate_rk45(rhs, p.D, p.t, tol);
  return finish(p.t, std::move(X), p.phi, p.psi, SolveMethod::ode_vectorized);
}

SolutionSample solve_ode(const TimeDepProblem& p, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("solve_ode: tol must be positive");
  auto rhs = [&](double s, const CMatrix& X) {
    return CMatrix(p.A_at(s).adjoint() * X + X * p.B_at(s) + p.C_at(s));
  };
  CMatrix X = integrate_rk45(rhs, p.D, p.t, tol);
  return finish(p.t, std::move(X), p.phi, p.psi, SolveMethod::ode_vectorized);
}

double fixed_point_residual(const MatrixODEProblem& p, const CMatrix& Xcand) {
  if (Xcand.rows() != p.n || Xcand.cols() != p.n)
    throw DimensionError("fixed_point_residual: candidate must be n x n");
  return spectral_norm(p.A.adjoint() * Xcand + Xcand * p.B + p.C);
}

}  // namespace sylverse
