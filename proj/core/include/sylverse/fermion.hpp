#pragma once

#include <string>
#include <vector>

#include "sylverse/matcore.hpp"
#include "sylverse/oracle.hpp"
#include "sylverse/problem.hpp"

namespace sylverse {

// Dissipative covariance dynamics of a free-fermion register whose modes
// couple to local baths:
//   d/dt X = Bgen^dagger X + X Bgen + Cnoise,  Bgen = -i Aherm - Gamma.
// Pinning the noise to the temperature via Cnoise = Xbeta Gamma + Gamma
// Xbeta makes the Fermi-Dirac filling Xbeta = (I + e^{beta Aherm})^{-1} the
// stationary covariance.
struct CovarianceModel {
  int Ns = 0;
  CMatrix Aherm;   // single-particle Hamiltonian, Hermitian, energy units
  CMatrix Gamma;   // bath coupling, positive semidefinite, inverse time
  double beta = 0.0;
  CMatrix X0;      // initial covariance
  CMatrix Bgen;    // -i Aherm - Gamma
  CMatrix Xbeta;   // Fermi-Dirac fixed point
  CMatrix Cnoise;  // Xbeta Gamma + Gamma Xbeta
};

// Checks Aherm = Aherm^dagger within 1e-12, eigenvalues of Gamma >= -1e-10,
// beta >= 0, X0 Hermitian (shape mismatches raise DimensionError, the rest
// ValidationError), then fills the derived fields. Xbeta applies the scalar
// Fermi function 1/(1 + e^{beta w}) to the eigenvalues of Aherm, so
// [Aherm, Xbeta] = 0 and the stationary residual vanishes.
CovarianceModel build_model(const CMatrix& Aherm, const CMatrix& Gamma,
                            double beta, const CMatrix& X0);

// The model as a constant-coefficient instance: A = B = Bgen, C = Cnoise,
// D = X0, phi = psi = |0>. Norm bounds are measured and rounded up at the
// third significant digit; the log-norm bounds are -lambda_min(Gamma) when
// Gamma is definite (the exact log norm of Bgen) and the safe 0 otherwise.
MatrixODEProblem to_ode_problem(const CovarianceModel& model, double t,
                                double eps);

// Covariance at each requested time by the reference integrator run at
// tolerance tol/10. Times must be nonnegative. Every sample is checked to
// be Hermitian with spectrum in [-tol, 1+tol]; a violation raises
// ValidationError naming the sample, since a covariance outside that window
// is not a fermionic state.
std::vector<SolutionSample> relax(const CovarianceModel& model,
                                  const std::vector<double>& tGrid,
                                  double tol);

// CSV rows {t, entry_re, entry_im, dist_to_fixed_point, min_eig, max_eig}
// for a trajectory produced by relax: entry is <0|X|0>, dist the spectral
// distance to Xbeta. Formatting is fixed at %.12g so artifacts are
// byte-stable across runs.
std::string trajectory_csv(const CovarianceModel& model,
                           const std::vector<SolutionSample>& samples);

}  // namespace sylverse
