#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace sylverse {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Matrix exponential by scaling and squaring of a truncated Taylor series.
// tol must lie in (1e-15, 1e-2). The result E satisfies
// ||E - exp(M)|| <= tol * max(1, ||exp(M)||) in spectral norm.
CMatrix expm(const CMatrix& M, double tol = 1e-13);

// Largest singular value. Uses a dense SVD up to dimension 512 and power
// iteration on M^dagger M (all-ones start vector) above that. Relative
// accuracy 1e-10.
double spectral_norm(const CMatrix& M);

// Log-norm (largest eigenvalue of the Hermitian part (M + M^dagger)/2).
// Absolute accuracy 1e-10. Controls growth: ||exp(sM)|| <= exp(s*log_norm(M)).
double log_norm(const CMatrix& M);

// Solves A x = b by pivoted Gaussian elimination. Throws SingularityError
// carrying the offending pivot index when a pivot is negligibly small.
CVector solve_dense(const CMatrix& A, const CVector& b);

// Adaptive composite Gauss-Legendre quadrature of a matrix-valued integrand
// over [lo, hi]. tol is an absolute entrywise target. Panels are refined
// until the local error estimate passes, always evaluating nodes in
// ascending order of the abscissa so results are bit-reproducible. Throws
// AccuracyError (with the achieved estimate) if the evaluation budget is
// exhausted first.
CMatrix quad_integrate(const std::function<CMatrix(double)>& f, double lo, double hi,
                       double tol);

// Scalar convenience overload with the same contract.
double quad_integrate_scalar(const std::function<double(double)>& f, double lo,
                             double hi, double tol);

}  // namespace sylverse
