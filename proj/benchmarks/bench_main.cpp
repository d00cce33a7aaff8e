#include <benchmark/benchmark.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <Eigen/Dense>

#include "sylverse/histsolve.hpp"
#include "sylverse/krylov.hpp"
#include "sylverse/matcore.hpp"
#include "sylverse/overlap.hpp"
#include "sylverse/problem.hpp"

namespace {

sylverse::CMatrix fill(int n, std::uint64_t seed) {
  sylverse::CMatrix M(n, n);
  std::uint64_t s = seed;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      s = s * 6364136223846793005ULL + 1442695040888963407ULL;
      double re = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
      s = s * 6364136223846793005ULL + 1442695040888963407ULL;
      double im = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
      M(i, j) = sylverse::Complex(re, im);
    }
  return M;
}

void BM_expm(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  sylverse::CMatrix M = fill(n, 17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sylverse::expm(M, 1e-12));
  }
}
BENCHMARK(BM_expm)->Arg(16)->Arg(64)->Arg(128);

void BM_spectral_norm(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  sylverse::CMatrix M = fill(n, 23);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sylverse::spectral_norm(M));
  }
}
BENCHMARK(BM_spectral_norm)->Arg(64)->Arg(256)->Arg(768);

void BM_build_system(benchmark::State& state) {
  using namespace sylverse;
  int n = static_cast<int>(state.range(0));
  MatrixODEProblem p = make_random_instance(n, 31, LogNormSign::negative, 2.0);
  int M = default_M(p), R = default_R(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_system(p, SideSelector::A_side, M, R, 8));
  }
}
BENCHMARK(BM_build_system)->Arg(4)->Arg(16)->Arg(64);

void BM_solve_history(benchmark::State& state) {
  using namespace sylverse;
  int n = static_cast<int>(state.range(0));
  MatrixODEProblem p = make_random_instance(n, 37, LogNormSign::negative, 2.0);
  BlockLinearSystem sys =
      build_system(p, SideSelector::A_side, default_M(p), default_R(p), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_history(sys, p.phi));
  }
}
BENCHMARK(BM_solve_history)->Arg(4)->Arg(16)->Arg(64);

void BM_estimate_entry(benchmark::State& state) {
  using namespace sylverse;
  int n = static_cast<int>(state.range(0));
  MatrixODEProblem p = make_random_instance(n, 41, LogNormSign::negative, 2.0);
  int M = default_M(p), R = default_R(p);
  int K = default_K(p, M, R);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        estimate_entry(p, M, R, K, EntryRoute::linear_systems));
  }
}
BENCHMARK(BM_estimate_entry)->Arg(4)->Arg(8)->Arg(16);

void BM_krylov_entry(benchmark::State& state) {
  using namespace sylverse;
  int n = static_cast<int>(state.range(0));
  SparseMatrix A = lattice(1, n, Complex(0, -1), Complex(-0.1, 0));
  SparseMatrix B = lattice(1, n, Complex(0, -0.8), Complex(-0.05, 0));
  SparseMatrix C = lattice(1, n, Complex(0.3, 0), Complex(0.5, 0));
  SparseMatrix D = lattice(1, n, Complex(0.2, 0), Complex(0.4, 0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(krylov_entry(A, B, C, D, n / 2, n / 2 + 3, 1.0, 16, 10));
  }
}
BENCHMARK(BM_krylov_entry)->Arg(256)->Arg(1024)->Arg(4096);

void BM_restarted_entry(benchmark::State& state) {
  using namespace sylverse;
  int n = static_cast<int>(state.range(0));
  SparseMatrix A = lattice(1, n, Complex(0, -1), Complex(-0.1, 0));
  SparseMatrix B = lattice(1, n, Complex(0, -0.8), Complex(-0.05, 0));
  SparseMatrix C = lattice(1, n, Complex(0.3, 0), Complex(0.5, 0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        restarted_entry(A, B, C, n / 2, n / 2 + 3, 1.6, 12, 0.1));
  }
}
BENCHMARK(BM_restarted_entry)->Arg(256)->Arg(1024);

// --------------------------------------------------------------------------
// Artifact mode: `sylverse_bench --csv[=path]` writes one row per sweep
// point with the dense eigendecomposition oracle as the error reference.

using sylverse::CMatrix;
using sylverse::Complex;
using sylverse::CVector;
using sylverse::SparseMatrix;

Complex entry_oracle_eig(const CMatrix& A, const CMatrix& B, const CMatrix& C,
                         const CMatrix& D, double t, int j, int k) {
  Eigen::ComplexEigenSolver<CMatrix> ea(A), eb(B);
  CMatrix P = ea.eigenvectors(), Q = eb.eigenvectors();
  CVector lam = ea.eigenvalues(), mu = eb.eigenvalues();
  int n = static_cast<int>(A.rows());
  CVector ej = CVector::Zero(n), ek = CVector::Zero(n);
  ej(j) = 1.0;
  ek(k) = 1.0;
  CVector alpha = P.inverse() * ej;
  CVector beta = Q.inverse() * ek;
  CMatrix G = P.adjoint() * C * Q;
  CMatrix H = P.adjoint() * D * Q;
  Complex acc{0.0, 0.0};
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      Complex z = std::conj(lam(p)) + mu(q);
      Complex factor =
          std::abs(z) < 1e-12 ? Complex(t, 0.0) : (std::exp(t * z) - 1.0) / z;
      acc += std::conj(alpha(p)) * (G(p, q) * factor + H(p, q) * std::exp(t * z)) *
             beta(q);
    }
  }
  return acc;
}

struct LatticeSet {
  SparseMatrix A, B, C, D;
};

LatticeSet lattice_set(int dims, int side) {
  using sylverse::lattice;
  LatticeSet s;
  s.A = lattice(dims, side, Complex(0, -1), Complex(-0.1, 0));
  s.B = lattice(dims, side, Complex(0, -0.8), Complex(-0.05, 0));
  s.C = lattice(dims, side, Complex(0.3, 0), Complex(0.5, 0));
  s.D = lattice(dims, side, Complex(0.2, 0), Complex(0.4, 0));
  return s;
}

void csv_row(std::string& out, const char* method, int n, int dims, int m, int L,
             long long wallNs, const sylverse::OpCounters& c, double absErr) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%s,%d,%d,%d,%d,%lld,%lld,%lld,%lld,%.6g\n",
                method, n, dims, m, L, wallNs, c.matvecs, c.inner_products,
                c.mem_highwater, absErr);
  out += buf;
}

int emit_csv(const std::string& path) {
  using namespace sylverse;
  using clock = std::chrono::steady_clock;
  std::string out =
      "method,n,D_lattice,m,L,wall_ns,matvecs,inner_products,mem_highwater,"
      "abs_err\n";

  const double t = 1.0;
  for (auto [dims, side] : {std::pair{1, 64}, {1, 128}, {1, 256}, {2, 12}, {3, 6}}) {
    LatticeSet s = lattice_set(dims, side);
    int n = s.A.n;
    Complex want = entry_oracle_eig(sparse_to_dense(s.A), sparse_to_dense(s.B),
                                    sparse_to_dense(s.C), sparse_to_dense(s.D), t,
                                    n / 2, n / 2 + 3);
    for (int m : {8, 16, 24}) {
      OpCounters ctr;
      auto tic = clock::now();
      Complex got = krylov_entry(s.A, s.B, s.C, s.D, n / 2, n / 2 + 3, t, m, 10, &ctr);
      long long ns =
          std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - tic)
              .count();
      csv_row(out, "krylov_entry", n, dims, m, 1, ns, ctr, std::abs(got - want));
    }
  }

  // Restart sweep: error versus mPrime at fixed segment length is reported
  // here; no bound is asserted.
  {
    LatticeSet s = lattice_set(1, 128);
    double tr = 1.6, r = 0.1;
    int L = static_cast<int>(std::ceil(tr / r));
    Complex want = entry_oracle_eig(sparse_to_dense(s.A), sparse_to_dense(s.B),
                                    sparse_to_dense(s.C), CMatrix::Zero(128, 128),
                                    tr, 60, 63);
    for (int mPrime : {8, 12, 16}) {
      OpCounters ctr;
      auto tic = clock::now();
      Complex got = restarted_entry(s.A, s.B, s.C, 60, 63, tr, mPrime, r, &ctr);
      long long ns =
          std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - tic)
              .count();
      csv_row(out, "restarted_entry", 128, 1, mPrime, L, ns, ctr,
              std::abs(got - want));
    }
  }

  if (path.empty()) {
    std::cout << out;
  } else {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      std::cerr << "cannot open " << path << "\n";
      return 1;
    }
    f << out;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind("--csv", 0) == 0) {
      std::string path;
      if (arg.size() > 5 && arg[5] == '=') path = arg.substr(6);
      return emit_csv(path);
    }
  }
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
