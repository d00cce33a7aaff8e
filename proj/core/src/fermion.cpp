#include "sylverse/fermion.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "sylverse/errors.hpp"

namespace sylverse {

namespace {

constexpr double kHermTol = 1e-12;
constexpr double kPsdTol = 1e-10;

double herm_defect(const CMatrix& M) {
  return (M - M.adjoint()).cwiseAbs().maxCoeff();
}

CMatrix hermitize(const CMatrix& M) { return 0.5 * (M + M.adjoint()); }

void check_square(const CMatrix& M, int n, const char* field) {
  if (M.rows() != n || M.cols() != n) {
    throw DimensionError(std::string("fermion: ") + field + " must be " +
                         std::to_string(n) + "x" + std::to_string(n));
  }
}

// Smallest bound with three significant digits that is >= x; zero stays zero.
double round_up_3sig(double x) {
  if (x <= 0.0) return 0.0;
  double k = std::floor(std::log10(x));
  double scale = std::pow(10.0, k - 2.0);
  double v = std::ceil(x / scale) * scale;
  while (v < x) v = std::nextafter(v, std::numeric_limits<double>::infinity());
  return v;
}

// validate() requires strictly positive norm bounds; a zero matrix gets the
// trivial bound 1.
double norm_bound(const CMatrix& M) {
  double v = round_up_3sig(spectral_norm(M));
  return v > 0.0 ? v : 1.0;
}

double min_eig_herm(const CMatrix& H) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(H));
  return es.eigenvalues().minCoeff();
}

void append_g(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  out += buf;
}

}  // namespace

CovarianceModel build_model(const CMatrix& Aherm, const CMatrix& Gamma,
                            double beta, const CMatrix& X0) {
  int n = static_cast<int>(Aherm.rows());
  if (n < 1 || Aherm.cols() != n) {
    throw DimensionError("fermion: Aherm must be square and nonempty");
  }
  check_square(Gamma, n, "Gamma");
  check_square(X0, n, "X0");
  if (herm_defect(Aherm) > kHermTol) {
    throw ValidationError("fermion: Aherm is not Hermitian", "Aherm");
  }
  if (herm_defect(Gamma) > kHermTol) {
    throw ValidationError("fermion: Gamma is not Hermitian", "Gamma");
  }
  if (min_eig_herm(Gamma) < -kPsdTol) {
    throw ValidationError("fermion: Gamma is not positive semidefinite",
                          "Gamma");
  }
  if (!(beta >= 0.0)) {
    throw ValidationError("fermion: beta must be nonnegative", "beta");
  }
  if (herm_defect(X0) > kHermTol) {
    throw ValidationError("fermion: X0 is not Hermitian", "X0");
  }
  CovarianceModel model;
  model.Ns = n;
  model.Aherm = Aherm;
  model.Gamma = Gamma;
  model.beta = beta;
  model.X0 = X0;
  model.Bgen = Complex(0.0, -1.0) * Aherm - Gamma;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(Aherm));
  Eigen::VectorXd fill(n);
  for (int k = 0; k < n; ++k) {
    // 1/(1 + e^{beta w}): overflow saturates cleanly to 0 and underflow to 1.
    fill(k) = 1.0 / (1.0 + std::exp(beta * es.eigenvalues()(k)));
  }
  model.Xbeta = hermitize(es.eigenvectors() * fill.asDiagonal() *
                          es.eigenvectors().adjoint());
  model.Cnoise = model.Xbeta * Gamma + Gamma * model.Xbeta;
  return model;
}

MatrixODEProblem to_ode_problem(const CovarianceModel& model, double t,
                                double eps) {
  MatrixODEProblem p;
  p.n = model.Ns;
  p.A = model.Bgen;
  p.B = model.Bgen;
  p.C = model.Cnoise;
  p.D = model.X0;
  p.t = t;
  p.eps = eps;
  p.phi = CVector::Unit(model.Ns, 0);
  p.psi = CVector::Unit(model.Ns, 0);
  p.a = norm_bound(model.Bgen);
  p.b = p.a;
  p.c = norm_bound(model.Cnoise);
  p.d = norm_bound(model.X0);
  double gmin = min_eig_herm(model.Gamma);
  double xi = gmin > 0.0 ? -gmin : 0.0;
  p.xiA = xi;
  p.xiB = xi;
  p.validate();
  return p;
}

std::vector<SolutionSample> relax(const CovarianceModel& model,
                                  const std::vector<double>& tGrid,
                                  double tol) {
  if (!(tol > 0.0)) {
    throw PreconditionError("relax: tolerance must be positive");
  }
  for (double t : tGrid) {
    if (!(t >= 0.0)) throw PreconditionError("relax: times must be nonnegative");
  }
  std::vector<SolutionSample> out;
  out.reserve(tGrid.size());
  for (double t : tGrid) {
    SolutionSample s;
    if (t == 0.0) {
      s.t = 0.0;
      s.X = model.X0;
      s.entry = model.X0(0, 0);
      s.method = SolveMethod::ode_vectorized;
    } else {
      s = solve_ode(to_ode_problem(model, t, tol), tol / 10.0);
    }
    if (herm_defect(s.X) > tol) {
      throw ValidationError("fermion: sample at t = " + std::to_string(t) +
                                " is not Hermitian",
                            "trajectory");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(s.X));
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    if (lo < -tol || hi > 1.0 + tol) {
      throw ValidationError("fermion: sample at t = " + std::to_string(t) +
                                " leaves the physical window [0, 1]",
                            "trajectory");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string trajectory_csv(const CovarianceModel& model,
                           const std::vector<SolutionSample>& samples) {
  std::string out = "t,entry_re,entry_im,dist_to_fixed_point,min_eig,max_eig\n";
  for (const SolutionSample& s : samples) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(s.X));
    double cols[6] = {s.t,
                      s.entry.real(),
                      s.entry.imag(),
                      spectral_norm(s.X - model.Xbeta),
                      es.eigenvalues().minCoeff(),
                      es.eigenvalues().maxCoeff()};
    for (int k = 0; k < 6; ++k) {
      if (k) out += ',';
      append_g(out, cols[k]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace sylverse
