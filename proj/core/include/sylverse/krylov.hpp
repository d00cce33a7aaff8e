#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "sylverse/matcore.hpp"

namespace sylverse {

// Row-compressed sparse matrix. Column indices are strictly increasing
// within each row and all below n; sparsity records the largest row
// population (informational, refreshed by the constructors here).
struct SparseMatrix {
  int n = 0;
  std::vector<std::vector<std::pair<int, Complex>>> rows;
  int sparsity = 0;
};

// Orthonormal Krylov frame with its compressed operator. m is the achieved
// dimension, which falls short of the request when the iteration breaks
// down. projected = V^dagger Op V.
struct KrylovBasis {
  int m = 0;
  std::vector<CVector> columns;
  CMatrix projected;
};

// Work counters for the classical-baseline comparisons. matvecs and
// inner_products count full n-dimensional operations, expms the dense
// subspace exponentials, mem_highwater the peak number of live complex
// entries across basis columns, seed/work vectors and compressed operators.
struct OpCounters {
  long long matvecs = 0;
  long long inner_products = 0;
  long long expms = 0;
  long long mem_highwater = 0;
};

SparseMatrix sparse_from_dense(const CMatrix& M, double drop = 0.0);
CMatrix sparse_to_dense(const SparseMatrix& S);
CVector sparse_apply(const SparseMatrix& S, const CVector& x);

// max_i sum_j |S_ij|, the induced infinity norm; the quadrature default and
// the seed substep rule use it as the norm proxy.
double sparse_row_bound(const SparseMatrix& S);

// Nearest-neighbor hopping on an open dims-dimensional cube of the given
// side (n = side^dims): hop on every edge, onsite on the diagonal (skipped
// when zero). dims in {1, 2, 3}.
SparseMatrix lattice(int dims, int side, Complex hop, Complex onsite);

// Modified Gram-Schmidt with one reorthogonalization pass; terminates early
// when the next residual drops below 1e-12 * ||start||.
KrylovBasis build_krylov(const SparseMatrix& op, const CVector& start, int m,
                         OpCounters* counters = nullptr);

// <j| X(t) |k> with both exponentials replaced by their projections onto
// K_A(m) and K_B(m): the D term at s = t plus Gauss-Legendre quadrature of
// the C term on Rquad nodes (Rquad <= 0 selects 8 + ceil(t * row bound)).
Complex krylov_entry(const SparseMatrix& pA, const SparseMatrix& pB,
                     const SparseMatrix& C, const SparseMatrix& D, int j, int k,
                     double t, int m, int Rquad = 0,
                     OpCounters* counters = nullptr);

// Integral-only restarted variant: the window splits into L = ceil(t/r)
// segments, each with a fresh dimension-mPrime pair of bases seeded by the
// previous segment's evolved vectors (order-16 Taylor steps). Bases are
// freed between segments, keeping memory O(mPrime * n).
Complex restarted_entry(const SparseMatrix& pA, const SparseMatrix& pB,
                        const SparseMatrix& C, int j, int k, double t,
                        int mPrime, double r, OpCounters* counters = nullptr);

}  // namespace sylverse
