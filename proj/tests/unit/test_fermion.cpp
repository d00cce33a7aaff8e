#include "sylverse/fermion.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sylverse/errors.hpp"
#include "sylverse/histsolve.hpp"
#include "sylverse/matcore.hpp"
#include "sylverse/overlap.hpp"

using namespace sylverse;

namespace {

CMatrix hermitize(const CMatrix& M) { return 0.5 * (M + M.adjoint()); }

CMatrix seeded_hermitian(int n, std::uint64_t seed, double norm) {
  CMatrix H = hermitize(testors::seeded_matrix(n, n, seed));
  return norm / spectral_norm(H) * H;
}

CMatrix seeded_psd(int n, std::uint64_t seed, double norm) {
  CMatrix M = testors::seeded_matrix(n, n, seed);
  CMatrix G = M * M.adjoint();
  return norm / spectral_norm(G) * G;
}

// Hermitian with deterministic eigenvalues inside (0, 1): a valid covariance.
CMatrix seeded_covariance(int n, std::uint64_t seed) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(seeded_hermitian(n, seed, 1.0));
  std::uint64_t s = seed ^ 0x5eedULL;
  Eigen::VectorXd fill(n);
  for (int k = 0; k < n; ++k) {
    // splitmix_unit draws from [-1, 1]; fold it into occupations in (0, 1).
    fill(k) = 0.05 + 0.45 * (testors::splitmix_unit(s) + 1.0);
  }
  return es.eigenvectors() * fill.asDiagonal() *
         es.eigenvectors().adjoint();
}

double min_eig(const CMatrix& H) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(H));
  return es.eigenvalues().minCoeff();
}

double max_eig(const CMatrix& H) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(H));
  return es.eigenvalues().maxCoeff();
}

std::vector<double> csv_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

TEST_CASE("fermion: infinite temperature fixes the half filling") {
  CMatrix A = seeded_hermitian(4, 301, 1.3);
  CMatrix G = seeded_psd(4, 302, 0.7);
  CovarianceModel model = build_model(A, G, 0.0, seeded_covariance(4, 303));
  CHECK(testors::max_abs(model.Xbeta - 0.5 * CMatrix::Identity(4, 4)) <= 1e-12);
}

TEST_CASE("fermion: zero temperature fills the negative modes") {
  CMatrix A = CMatrix::Zero(2, 2);
  A(0, 0) = -1.0;
  A(1, 1) = 1.0;
  CMatrix G = 0.3 * CMatrix::Identity(2, 2);
  CovarianceModel model = build_model(A, G, 200.0, 0.5 * CMatrix::Identity(2, 2));
  CMatrix want = CMatrix::Zero(2, 2);
  want(0, 0) = 1.0;
  CHECK(testors::max_abs(model.Xbeta - want) <= 1e-80);

  // Same spectrum conjugated by an explicit unitary: X_beta must rotate along.
  double c = std::cos(0.3), s = std::sin(0.3);
  Complex ph = std::exp(Complex(0.0, 0.7));
  CMatrix U(2, 2);
  U << Complex(c, 0), -s * ph, s * std::conj(ph), Complex(c, 0);
  CovarianceModel rot =
      build_model(CMatrix(U * A * U.adjoint()), G, 200.0,
                  0.5 * CMatrix::Identity(2, 2));
  CHECK(testors::max_abs(rot.Xbeta - U * want * U.adjoint()) <= 1e-12);
}

TEST_CASE("fermion: derived fields satisfy the defining algebra") {
  CMatrix A = seeded_hermitian(4, 311, 1.1);
  CMatrix G = seeded_psd(4, 312, 0.8);
  CovarianceModel model = build_model(A, G, 1.4, seeded_covariance(4, 313));
  CHECK(testors::max_abs(model.Bgen - (Complex(0, -1) * A - G)) <= 1e-14);
  CHECK(testors::max_abs(model.Cnoise -
                         (model.Xbeta * G + G * model.Xbeta)) <= 1e-14);
  CHECK(testors::max_abs(model.Cnoise - model.Cnoise.adjoint()) <= 1e-13);
  CHECK(testors::max_abs(model.Xbeta - model.Xbeta.adjoint()) <= 1e-13);
  CHECK(min_eig(model.Xbeta) >= -1e-12);
  CHECK(max_eig(model.Xbeta) <= 1.0 + 1e-12);
  CHECK(log_norm(model.Bgen) <= 1e-9);
  // X_beta = f(A) commutes with A, so it solves the stationary equation.
  MatrixODEProblem p = to_ode_problem(model, 1.0, 1e-6);
  CHECK(fixed_point_residual(p, model.Xbeta) <= 1e-10);
}

TEST_CASE("fermion: invalid inputs are rejected") {
  CMatrix A = seeded_hermitian(3, 321, 1.0);
  CMatrix G = seeded_psd(3, 322, 0.5);
  CMatrix X0 = seeded_covariance(3, 323);
  CMatrix skew = A;
  skew(0, 1) += Complex(0.0, 1e-6);
  CHECK_THROWS_AS((void)build_model(skew, G, 1.0, X0), ValidationError);
  CMatrix indef = G;
  indef -= 2.0 * spectral_norm(G) * CMatrix::Identity(3, 3);
  CHECK_THROWS_AS((void)build_model(A, indef, 1.0, X0), ValidationError);
  CHECK_THROWS_AS((void)build_model(A, G, -0.1, X0), ValidationError);
  CHECK_THROWS_AS((void)build_model(A, G, 1.0, skew), ValidationError);
  CHECK_THROWS_AS((void)build_model(A, seeded_psd(2, 322, 0.5), 1.0, X0),
                  DimensionError);
  CHECK_THROWS_AS((void)build_model(A, G, 1.0, seeded_covariance(4, 323)),
                  DimensionError);
}

TEST_CASE("fermion: ode problem wraps the generator with measured bounds") {
  CMatrix A = seeded_hermitian(3, 331, 0.9);
  CMatrix G = 0.4 * CMatrix::Identity(3, 3) + seeded_psd(3, 332, 0.3);
  CovarianceModel model = build_model(A, G, 1.2, seeded_covariance(3, 333));
  MatrixODEProblem p = to_ode_problem(model, 2.0, 1e-5);
  CHECK_NOTHROW(p.validate());
  CHECK(p.n == 3);
  CHECK(p.t == 2.0);
  CHECK(p.eps == 1e-5);
  CHECK(testors::max_abs(p.A - model.Bgen) == 0.0);
  CHECK(testors::max_abs(p.B - model.Bgen) == 0.0);
  CHECK(testors::max_abs(p.C - model.Cnoise) == 0.0);
  CHECK(testors::max_abs(p.D - model.X0) == 0.0);
  CHECK((p.phi - CVector::Unit(3, 0)).norm() == 0.0);
  CHECK((p.psi - CVector::Unit(3, 0)).norm() == 0.0);
  double nb = spectral_norm(model.Bgen);
  CHECK(p.a == p.b);
  CHECK(p.a >= nb);
  // Three significant digits: the step just above a power of ten is 1%.
  CHECK(p.a <= nb * 1.011);
  CHECK(p.c >= spectral_norm(model.Cnoise));
  CHECK(p.d >= spectral_norm(model.X0));
  // Gamma is definite here, so the log-norm bound is -lambda_min(Gamma).
  CHECK(p.xiA == p.xiB);
  CHECK(p.xiA == doctest::Approx(-min_eig(G)).epsilon(1e-10));
  CHECK(log_norm(p.A) <= p.xiA + 1e-9);

  // A singular Gamma falls back to the safe zero bound.
  CMatrix Gsing = CMatrix::Zero(3, 3);
  Gsing(0, 0) = 0.8;
  CovarianceModel loose = build_model(A, Gsing, 1.2, seeded_covariance(3, 334));
  CHECK(to_ode_problem(loose, 1.0, 1e-6).xiA == 0.0);
}

TEST_CASE("fermion: diagonal model relaxes mode by mode") {
  int n = 3;
  double gamma = 0.6, beta = 0.8;
  Eigen::Vector3d w(0.4, -0.7, 1.1), x0(0.9, 0.2, 0.55);
  CMatrix A = CMatrix::Zero(n, n), X0 = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    A(k, k) = w(k);
    X0(k, k) = x0(k);
  }
  CovarianceModel model =
      build_model(A, gamma * CMatrix::Identity(n, n), beta, X0);
  std::vector<double> grid{0.5, 1.5, 3.0};
  auto samples = relax(model, grid, 1e-8);
  REQUIRE(samples.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double t = grid[i];
    CHECK(samples[i].t == t);
    for (int k = 0; k < n; ++k) {
      double xb = 1.0 / (1.0 + std::exp(beta * w(k)));
      double want = xb + (x0(k) - xb) * std::exp(-2.0 * gamma * t);
      CHECK(std::abs(samples[i].X(k, k) - Complex(want, 0.0)) <= 1e-7);
      for (int l = 0; l < n; ++l)
        if (l != k) CHECK(std::abs(samples[i].X(k, l)) <= 1e-8);
    }
  }
}

TEST_CASE("fermion: trajectory is physical and contracts to the fixed point") {
  CMatrix A = seeded_hermitian(4, 341, 1.0);
  CMatrix G = 0.5 * CMatrix::Identity(4, 4);
  CovarianceModel model = build_model(A, G, 1.1, seeded_covariance(4, 342));
  double gamma = 0.5;
  double dist0 = spectral_norm(model.X0 - model.Xbeta);
  std::vector<double> grid{1.0 / gamma, 4.0 / gamma, 8.0 / gamma};
  auto samples = relax(model, grid, 1e-7);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CMatrix& X = samples[i].X;
    CHECK(testors::max_abs(X - X.adjoint()) <= 1e-9);
    CHECK(min_eig(X) >= -1e-7);
    CHECK(max_eig(X) <= 1.0 + 1e-7);
    double bound = dist0 * std::exp(-2.0 * gamma * grid[i]) + 1e-6;
    CHECK(spectral_norm(X - model.Xbeta) <= bound);
  }
}

TEST_CASE("fermion: starting at the fixed point stays there") {
  CMatrix A = seeded_hermitian(3, 351, 1.2);
  CMatrix G = seeded_psd(3, 352, 0.6);
  CovarianceModel seeded = build_model(A, G, 0.9, seeded_covariance(3, 353));
  CovarianceModel model = build_model(A, G, 0.9, seeded.Xbeta);
  for (const auto& s : relax(model, {0.3, 1.1, 2.7}, 1e-8)) {
    CHECK(spectral_norm(s.X - model.Xbeta) <= 1e-7);
  }
}

TEST_CASE("fermion: closed dynamics conjugates by the propagator") {
  CMatrix A = seeded_hermitian(3, 361, 1.4);
  CMatrix X0 = seeded_covariance(3, 362);
  CovarianceModel model = build_model(A, CMatrix::Zero(3, 3), 0.7, X0);
  CHECK(testors::max_abs(model.Cnoise) == 0.0);
  // No dissipation to damp integrator drift here, so the window is 1e-6.
  for (const auto& s : relax(model, {0.7, 1.9}, 1e-6)) {
    CMatrix U = testors::oracle_expm_eig(Complex(0, 1) * s.t * A);
    CHECK(testors::max_abs(s.X - U * X0 * U.adjoint()) <= 1e-6);
    CHECK(std::abs(s.X.trace() - X0.trace()) <= 1e-6);
    CHECK(std::abs(spectral_norm(s.X) - spectral_norm(X0)) <= 1e-6);
  }
}

TEST_CASE("fermion: entry pipeline agrees with the trajectory") {
  CMatrix A = seeded_hermitian(3, 371, 0.8);
  CMatrix G = 0.4 * CMatrix::Identity(3, 3) + seeded_psd(3, 372, 0.25);
  CovarianceModel model = build_model(A, G, 1.2, seeded_covariance(3, 373));
  double t = 1.2, eps = 1e-4;
  MatrixODEProblem p = to_ode_problem(model, t, eps);
  int M = default_M(p), R = default_R(p), K = default_K(p, M, R);
  Complex entry = estimate_entry(p, M, R, K, EntryRoute::linear_systems);
  auto samples = relax(model, {t}, 1e-8);
  CHECK(samples[0].entry == samples[0].X(0, 0));
  CHECK(std::abs(entry - samples[0].entry) <= eps);
}

TEST_CASE("fermion: relax validates its inputs") {
  CMatrix A = seeded_hermitian(3, 381, 1.0);
  CMatrix G = seeded_psd(3, 382, 0.5);
  CovarianceModel model = build_model(A, G, 1.0, seeded_covariance(3, 383));
  CHECK_THROWS_AS((void)relax(model, {0.5, -0.1}, 1e-6), PreconditionError);
  CHECK_THROWS_AS((void)relax(model, {0.5}, 0.0), PreconditionError);
  // A Hermitian start outside [0,1] passes build_model but is not a fermionic
  // covariance; the trajectory check must flag it at the first sample.
  CovarianceModel hot = build_model(A, G, 1.0, CMatrix(5.0 * CMatrix::Identity(3, 3)));
  CHECK_THROWS_AS((void)relax(hot, {0.0, 0.4}, 1e-6), ValidationError);
}

TEST_CASE("fermion: trajectory csv is stable and carries the right columns") {
  CMatrix A = seeded_hermitian(3, 391, 1.0);
  CMatrix G = 0.5 * CMatrix::Identity(3, 3) + seeded_psd(3, 392, 0.2);
  CovarianceModel model = build_model(A, G, 1.3, seeded_covariance(3, 393));
  auto samples = relax(model, {0.0, 0.8}, 1e-7);
  std::string csv = trajectory_csv(model, samples);
  CHECK(csv == trajectory_csv(model, samples));
  std::stringstream ss(csv);
  std::string line;
  REQUIRE(std::getline(ss, line));
  CHECK(line == "t,entry_re,entry_im,dist_to_fixed_point,min_eig,max_eig");
  REQUIRE(std::getline(ss, line));
  std::vector<double> row = csv_row(line);
  REQUIRE(row.size() == 6);
  CHECK(row[0] == 0.0);
  CHECK(std::abs(row[1] - model.X0(0, 0).real()) <= 1e-10);
  CHECK(std::abs(row[2] - model.X0(0, 0).imag()) <= 1e-10);
  CHECK(std::abs(row[3] - spectral_norm(model.X0 - model.Xbeta)) <= 1e-9);
  CHECK(std::abs(row[4] - min_eig(model.X0)) <= 1e-9);
  CHECK(std::abs(row[5] - max_eig(model.X0)) <= 1e-9);
  REQUIRE(std::getline(ss, line));
  CHECK(csv_row(line)[0] == 0.8);
  CHECK_FALSE(std::getline(ss, line));
}
