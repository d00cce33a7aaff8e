#include "doctest.h"
#include "oracles.hpp"
#include "sylverse/errors.hpp"
#include "sylverse/matcore.hpp"

#include <cmath>
#include <cstring>

using namespace sylverse;
using testors::max_abs;
using testors::seeded_matrix;

TEST_CASE("expm matches the diagonalization oracle") {
  for (int n : {2, 5, 9}) {
    for (double scale : {0.3, 1.0, 4.0}) {
      CMatrix M = scale * seeded_matrix(n, n, 100 + n);
      CMatrix E = expm(M, 1e-13);
      CMatrix R = testors::oracle_expm_eig(M);
      double denom = std::max(1.0, max_abs(R));
      CHECK(max_abs(E - R) / denom <= 1e-10);
    }
  }
}

TEST_CASE("expm matches the raw series oracle at small norm") {
  CMatrix M = 0.7 * seeded_matrix(6, 6, 7);
  CHECK(max_abs(expm(M, 1e-13) - testors::oracle_expm_series(M)) <= 1e-12);
}

TEST_CASE("expm of a diagonal matrix reproduces scalar exponentials") {
  CMatrix M = CMatrix::Zero(2, 2);
  M(0, 0) = Complex(1.0, 0.0);
  M(1, 1) = Complex(0.0, 1.0);
  CMatrix E = expm(M, 1e-13);
  // exp(1) and exp(i) = cos 1 + i sin 1
  CHECK(std::abs(E(0, 0) - Complex(2.718281828459045, 0.0)) <= 1e-13);
  CHECK(std::abs(E(1, 1) - Complex(0.5403023058681398, 0.8414709848078965)) <= 1e-13);
  CHECK(std::abs(E(0, 1)) <= 1e-15);
  CHECK(std::abs(E(1, 0)) <= 1e-15);
}

TEST_CASE("expm of a nilpotent matrix terminates exactly") {
  CMatrix N = CMatrix::Zero(2, 2);
  N(0, 1) = 1.0;
  CMatrix E = expm(N, 1e-13);
  CHECK(std::abs(E(0, 0) - 1.0) <= 1e-15);
  CHECK(std::abs(E(0, 1) - 1.0) <= 1e-14);
  CHECK(std::abs(E(1, 0)) <= 1e-15);
  CHECK(std::abs(E(1, 1) - 1.0) <= 1e-15);
}

TEST_CASE("expm rejects bad tolerances and shapes") {
  CMatrix M = CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(expm(M, 1e-16), PreconditionError);
  CHECK_THROWS_AS(expm(M, 0.0), PreconditionError);
  CHECK_THROWS_AS(expm(M, 0.5), PreconditionError);
  CHECK_THROWS_AS(expm(CMatrix::Zero(2, 3), 1e-13), DimensionError);
}

TEST_CASE("expm factorizes over commuting summands") {
  CMatrix S = seeded_matrix(5, 5, 42);
  CMatrix P = S;                      // both summands are polynomials in S,
  CMatrix Q = S * S / 3.0 + 0.5 * S;  // so they commute exactly
  CMatrix lhs = expm(P + Q, 1e-13);
  CMatrix rhs = expm(P, 1e-13) * expm(Q, 1e-13);
  CHECK(max_abs(lhs - rhs) <= 1e-8 * std::max(1.0, max_abs(lhs)));
}

TEST_CASE("expm growth is controlled by the log norm") {
  double tol = 1e-12;
  for (int seed : {1, 2, 3}) {
    CMatrix M = seeded_matrix(6, 6, seed);
    double mu = log_norm(M);
    for (double s : {0.3, 1.0, 2.7}) {
      CHECK(spectral_norm(expm(s * M, tol)) <= std::exp(s * mu) + 10 * tol);
    }
  }
}

TEST_CASE("spectral norm agrees with a frozen 2x2 value") {
  CMatrix M(2, 2);
  M << 1.0, 2.0, 3.0, 4.0;
  // sigma_max^2 = lambda_max(M^T M) = 15 + sqrt(221), so
  // sigma_max = sqrt(15 + sqrt(221)) = 5.464985704219043
  CHECK(std::abs(spectral_norm(M) - 5.464985704219043) <= 1e-12);
}

TEST_CASE("spectral norm matches the Jacobi SVD oracle") {
  for (int n : {1, 3, 17, 40}) {
    CMatrix M = seeded_matrix(n, n, 900 + n);
    double got = spectral_norm(M);
    double want = testors::oracle_norm_jacobi(M);
    CHECK(std::abs(got - want) <= 1e-10 * want);
  }
  CMatrix R = seeded_matrix(12, 5, 77);  // rectangular input is allowed
  CHECK(std::abs(spectral_norm(R) - testors::oracle_norm_jacobi(R)) <=
        1e-10 * testors::oracle_norm_jacobi(R));
}

TEST_CASE("spectral norm of scaled identity and zero") {
  CMatrix I5 = Complex(0.0, -3.5) * CMatrix::Identity(5, 5);
  CHECK(std::abs(spectral_norm(I5) - 3.5) <= 1e-12);
  CHECK(spectral_norm(CMatrix::Zero(4, 4)) == 0.0);
}

TEST_CASE("spectral norm above the dense cutoff uses the iterative path") {
  int n = 600;
  CMatrix D = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = 0.001 * i;  // max entry 0.599
  D(137, 137) = 7.25;
  CHECK(std::abs(spectral_norm(D) - 7.25) <= 1e-9 * 7.25);

  CMatrix M = seeded_matrix(530, 530, 5);
  double want = testors::oracle_norm_eig(M);
  CHECK(std::abs(spectral_norm(M) - want) <= 1e-9 * want);
}

TEST_CASE("log norm frozen values") {
  CMatrix A = CMatrix::Zero(3, 3);
  A(0, 0) = -0.19509032201612825;  // -sin(pi/16)
  A(1, 1) = -1.0;
  A(2, 2) = -1.0;
  CHECK(std::abs(log_norm(A) - (-0.19509032201612825)) <= 1e-12);

  CMatrix N = CMatrix::Zero(2, 2);
  N(0, 1) = 1.0;  // Hermitian part [[0, .5], [.5, 0]] has top eigenvalue 1/2
  CHECK(std::abs(log_norm(N) - 0.5) <= 1e-12);
}

TEST_CASE("log norm of a skew-Hermitian matrix vanishes") {
  CMatrix G = seeded_matrix(7, 7, 11);
  CMatrix S = 0.5 * (G - G.adjoint());
  CHECK(std::abs(log_norm(S)) <= 1e-10);
}

TEST_CASE("log norm never exceeds the spectral norm") {
  for (int seed : {4, 5, 6, 7}) {
    CMatrix M = seeded_matrix(8, 8, seed);
    CHECK(log_norm(M) <= spectral_norm(M) + 1e-10);
  }
}

TEST_CASE("solve_dense round-trips well-conditioned systems") {
  for (int n : {2, 8, 24}) {
    CMatrix A = seeded_matrix(n, n, 300 + n) + 2.0 * CMatrix::Identity(n, n);
    CVector xtrue = testors::seeded_vector(n, 9000 + n);
    CVector b = A * xtrue;
    CVector x = solve_dense(A, b);
    CHECK((x - xtrue).norm() <= 1e-8 * xtrue.norm());
    CHECK((A * x - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("solve_dense flags singular systems with a pivot index") {
  CMatrix Z = CMatrix::Zero(3, 3);
  CVector b = CVector::Ones(3);
  CHECK_THROWS_AS(solve_dense(Z, b), SingularityError);

  CMatrix R(2, 2);
  R << 1.0, 1.0, 1.0, 1.0;  // rank one
  try {
    solve_dense(R, CVector::Ones(2));
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    CHECK(e.pivot >= 0);
    CHECK(e.pivot < 2);
  }

  CHECK_THROWS_AS(solve_dense(CMatrix::Identity(3, 3), CVector::Ones(2)),
                  DimensionError);
  CHECK_THROWS_AS(solve_dense(CMatrix::Zero(2, 3), CVector::Ones(3)), DimensionError);
}

TEST_CASE("quadrature reproduces frozen integrals") {
  // int_0^1 exp(x) dx = e - 1
  auto f1 = [](double s) {
    CMatrix m(1, 1);
    m(0, 0) = std::exp(s);
    return m;
  };
  CMatrix I1 = quad_integrate(f1, 0.0, 1.0, 1e-12);
  CHECK(std::abs(I1(0, 0) - 1.718281828459045) <= 2e-12);

  // int_0^2 x exp(x) dx = (x-1)exp(x) evaluated 0..2 = e^2 + 1
  double I2 = quad_integrate_scalar([](double s) { return s * std::exp(s); }, 0.0,
                                    2.0, 1e-12);
  CHECK(std::abs(I2 - 8.38905609893065) <= 5e-12);

  // entrywise: int_0^1 [[1, x], [x^2, e^x]] dx = [[1, 1/2], [1/3, e-1]]
  auto f3 = [](double s) {
    CMatrix m(2, 2);
    m << 1.0, s, s * s, std::exp(s);
    return m;
  };
  CMatrix I3 = quad_integrate(f3, 0.0, 1.0, 1e-12);
  CHECK(std::abs(I3(0, 0) - 1.0) <= 2e-12);
  CHECK(std::abs(I3(0, 1) - 0.5) <= 2e-12);
  CHECK(std::abs(I3(1, 0) - 0.3333333333333333) <= 2e-12);
  CHECK(std::abs(I3(1, 1) - 1.718281828459045) <= 2e-12);
}

TEST_CASE("quadrature agrees with the Simpson oracle on an oscillatory matrix") {
  auto f = [](double s) {
    CMatrix m(2, 2);
    m(0, 0) = std::sin(3.0 * s);
    m(0, 1) = Complex(std::cos(5.0 * s), s);
    m(1, 0) = s * s * s;
    m(1, 1) = std::exp(-s) * std::sin(7.0 * s);
    return m;
  };
  CMatrix got = quad_integrate(f, 0.0, 3.0, 1e-11);
  CMatrix want = testors::oracle_simpson(f, 0.0, 3.0, 20000);
  CHECK(max_abs(got - want) <= 1e-9);
}

TEST_CASE("quadrature is deterministic across calls") {
  auto f = [](double s) {
    CMatrix m(1, 2);
    m(0, 0) = std::sin(11.0 * s) / (1.0 + s);
    m(0, 1) = std::cos(9.0 * s * s);
    return m;
  };
  CMatrix a = quad_integrate(f, 0.0, 2.0, 1e-10);
  CMatrix b = quad_integrate(f, 0.0, 2.0, 1e-10);
  CHECK(std::memcmp(a.data(), b.data(), sizeof(Complex) * 2) == 0);
}

TEST_CASE("quadrature reports budget exhaustion with the achieved error") {
  auto nasty = [](double s) {
    CMatrix m(1, 1);
    m(0, 0) = std::sin(1.0 / (s + 1e-13));
    return m;
  };
  try {
    quad_integrate(nasty, 0.0, 1.0, 1e-13);
    FAIL("expected AccuracyError");
  } catch (const AccuracyError& e) {
    CHECK(e.achieved > 0.0);
  }
}

TEST_CASE("quadrature rejects reversed limits and bad tolerances") {
  auto f = [](double) { return CMatrix::Zero(1, 1); };
  CHECK_THROWS_AS(quad_integrate(f, 1.0, 0.0, 1e-10), PreconditionError);
  CHECK_THROWS_AS(quad_integrate(f, 0.0, 1.0, -1.0), PreconditionError);
}

TEST_CASE("scalar quadrature handles a zero-width interval") {
  double v = quad_integrate_scalar([](double s) { return std::exp(s); }, 1.5, 1.5,
                                   1e-12);
  CHECK(v == 0.0);
}
