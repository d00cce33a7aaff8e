#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sylverse/matcore.hpp"

namespace sylverse {

// Constant-coefficient instance of d/dt X = A^dagger X + X B + C, X(0) = D.
// The target quantity is the entry <phi| X(t) |psi> to additive error eps.
// a, b, c, d bound the spectral norms of A, B, C, D; xiA, xiB bound the
// log-norms of A and B. Bounds are stored (they are part of the access
// model), but validate() re-measures and rejects instances that break them.
struct MatrixODEProblem {
  int n = 0;
  CMatrix A, B, C, D;
  double t = 0.0;
  CVector phi, psi;
  double eps = 1e-6;
  double a = 1.0, b = 1.0, c = 1.0, d = 1.0;
  double xiA = 0.0, xiB = 0.0;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Time-dependent variant. Coefficients are sampled on the uniform grid
// tau_j = (j/J) t for j = 0..J-1 and interpolated piecewise-linearly; past
// the last sample the value is held constant. xiAfun/xiBfun bound the
// log-norm at each grid point; derivA/B/C bound max_s ||Y'(s)|| and are
// trusted inputs.
struct TimeDepProblem {
  int n = 0;
  int gridJ = 0;
  std::vector<CMatrix> Aseq, Bseq, Cseq;
  CMatrix D;
  double t = 0.0;
  double eps = 1e-6;
  CVector phi, psi;
  double a = 1.0, b = 1.0, c = 1.0, d = 1.0;
  std::vector<double> xiAfun, xiBfun;
  double derivA = 0.0, derivB = 0.0, derivC = 0.0;

  void validate() const;

  CMatrix A_at(double s) const;
  CMatrix B_at(double s) const;
  CMatrix C_at(double s) const;
};

enum class LogNormSign { negative, zero, positive };

// Hard instance family behind the query lower bound: A is diagonal with a
// single slow mode -sin(theta), all other modes at -1; B = 0, C = I, D = 0,
// phi = psi = |0>. Requires n >= 1, theta in (0, pi/2], t > 0.
MatrixODEProblem make_lower_bound_instance(int n, double theta, double t);

// Seeded dense instance, n <= 256. The sign selects the log-norm regime of
// A and B: "negative" shifts both to log-norm -0.1, "zero" makes them
// skew-Hermitian, "positive" shifts to +0.25. Norm bounds are measured and
// rounded up to 3 significant figures.
MatrixODEProblem make_random_instance(int n, std::uint64_t seed, LogNormSign sign,
                                      double t = 1.0);

using AnyProblem = std::variant<MatrixODEProblem, TimeDepProblem>;

// JSON round trip. load re-validates every invariant; errors are
// ValidationError instances naming the field.
AnyProblem load_problem(const std::string& path);
void save_problem(const MatrixODEProblem& p, const std::string& path);
void save_problem(const TimeDepProblem& p, const std::string& path);

}  // namespace sylverse
