#include "sylverse/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sampling.hpp"
#include "sylverse/errors.hpp"

namespace sylverse {

namespace {

void check_sparse(const SparseMatrix& S, const char* who) {
  if (S.n < 1) throw PreconditionError(std::string(who) + ": empty matrix");
  if (static_cast<int>(S.rows.size()) != S.n) {
    throw DimensionError(std::string(who) + ": row count does not match n");
  }
  for (const auto& row : S.rows) {
    int prev = -1;
    for (const auto& entry : row) {
      if (entry.first <= prev) {
        throw PreconditionError(std::string(who) +
                                ": column indices must increase within a row");
      }
      if (entry.first >= S.n) {
        throw PreconditionError(std::string(who) + ": column index out of range");
      }
      prev = entry.first;
    }
  }
}

// Peak-live-entry accounting behind OpCounters::mem_highwater.
struct MemTracker {
  long long cur = 0;
  long long high = 0;
  void add(long long k) {
    cur += k;
    high = std::max(high, cur);
  }
  void sub(long long k) { cur -= k; }
};

CVector apply_raw(const SparseMatrix& S, const CVector& x) {
  CVector y = CVector::Zero(S.n);
  for (int i = 0; i < S.n; ++i) {
    Complex acc{0.0, 0.0};
    for (const auto& entry : S.rows[i]) acc += entry.second * x(entry.first);
    y(i) = acc;
  }
  return y;
}

CVector apply_counted(const SparseMatrix& S, const CVector& x, OpCounters* ctr) {
  if (ctr) ++ctr->matvecs;
  return apply_raw(S, x);
}

Complex dot_counted(const CVector& a, const CVector& b, OpCounters* ctr) {
  if (ctr) ++ctr->inner_products;
  return a.dot(b);
}

double norm_counted(const CVector& a, OpCounters* ctr) {
  if (ctr) ++ctr->inner_products;
  return a.norm();
}

KrylovBasis build_impl(const SparseMatrix& op, const CVector& start, int m,
                       OpCounters* ctr, MemTracker& mem) {
  check_sparse(op, "build_krylov");
  if (start.size() != op.n) {
    throw DimensionError("build_krylov: start length does not match n");
  }
  if (m < 1 || m > op.n) {
    throw PreconditionError("build_krylov: m must lie in [1, n]");
  }
  double snorm = norm_counted(start, ctr);
  if (!(snorm > 0.0)) {
    throw PreconditionError("build_krylov: start vector is zero");
  }
  double breakTol = 1e-12 * snorm;
  KrylovBasis basis;
  mem.add(op.n);  // shared workspace vector
  basis.columns.push_back(start / snorm);
  mem.add(op.n);
  while (static_cast<int>(basis.columns.size()) < m) {
    CVector w = apply_counted(op, basis.columns.back(), ctr);
    for (int pass = 0; pass < 2; ++pass) {
      for (const CVector& v : basis.columns) {
        w -= dot_counted(v, w, ctr) * v;
      }
    }
    double nw = norm_counted(w, ctr);
    if (nw < breakTol) break;
    basis.columns.push_back(w / nw);
    mem.add(op.n);
  }
  basis.m = static_cast<int>(basis.columns.size());
  basis.projected.resize(basis.m, basis.m);
  mem.add(static_cast<long long>(basis.m) * basis.m);
  for (int q = 0; q < basis.m; ++q) {
    CVector tmp = apply_counted(op, basis.columns[q], ctr);
    for (int p = 0; p < basis.m; ++p) {
      basis.projected(p, q) = dot_counted(basis.columns[p], tmp, ctr);
    }
  }
  mem.sub(op.n);  // workspace released
  return basis;
}

void free_columns(KrylovBasis& basis, MemTracker& mem) {
  mem.sub(static_cast<long long>(basis.columns.size()) * basis.columns.front().size());
  basis.columns.clear();
}

void free_projected(KrylovBasis& basis, MemTracker& mem) {
  mem.sub(static_cast<long long>(basis.projected.rows()) * basis.projected.cols());
  basis.projected.resize(0, 0);
}

CMatrix compress(const SparseMatrix& S, const KrylovBasis& left,
                 const KrylovBasis& right, OpCounters* ctr, MemTracker& mem) {
  CMatrix out(left.m, right.m);
  mem.add(static_cast<long long>(left.m) * right.m);
  mem.add(S.n);
  for (int q = 0; q < right.m; ++q) {
    CVector tmp = apply_counted(S, right.columns[q], ctr);
    for (int p = 0; p < left.m; ++p) {
      out(p, q) = dot_counted(left.columns[p], tmp, ctr);
    }
  }
  mem.sub(S.n);
  return out;
}

CVector unit_start(int n, int j) {
  CVector e = CVector::Zero(n);
  e(j) = 1.0;
  return e;
}

void check_shared(const SparseMatrix& pA, const SparseMatrix& pB,
                  const SparseMatrix& C, int j, int k, double t,
                  const char* who) {
  check_sparse(pA, who);
  check_sparse(pB, who);
  check_sparse(C, who);
  if (pB.n != pA.n || C.n != pA.n) {
    throw DimensionError(std::string(who) + ": matrix dimensions disagree");
  }
  if (j < 0 || j >= pA.n || k < 0 || k >= pA.n) {
    throw PreconditionError(std::string(who) + ": entry index out of range");
  }
  if (!(t >= 0.0)) {
    throw PreconditionError(std::string(who) + ": negative time");
  }
}

Complex expm_col0_sandwich(const CMatrix& At, const CMatrix& Bt,
                           const CMatrix& mid, double s, OpCounters* ctr) {
  CVector uA = expm(s * At).col(0);
  CVector uB = expm(s * Bt).col(0);
  if (ctr) ctr->expms += 2;
  return uA.dot(mid * uB);
}

// Exponential seed step by an order-16 Taylor sum of sparse products,
// substepped so each piece keeps seg * rowbound <= 1.
void advance_seed(const SparseMatrix& S, CVector& vec, double seg, double rb,
                  OpCounters* ctr, MemTracker& mem) {
  int pieces = std::max(1, static_cast<int>(std::ceil(seg * rb - 1e-12)));
  double w = seg / pieces;
  mem.add(2LL * S.n);
  for (int piece = 0; piece < pieces; ++piece) {
    CVector term = vec;
    CVector acc = vec;
    for (int q = 1; q <= 16; ++q) {
      term = apply_counted(S, term, ctr) * (w / q);
      acc += term;
    }
    vec = acc;
  }
  mem.sub(2LL * S.n);
}

void merge_highwater(OpCounters* ctr, const MemTracker& mem) {
  if (ctr) ctr->mem_highwater = std::max(ctr->mem_highwater, mem.high);
}

}  // namespace

SparseMatrix sparse_from_dense(const CMatrix& M, double drop) {
  if (M.rows() != M.cols()) {
    throw DimensionError("sparse_from_dense: matrix must be square");
  }
  SparseMatrix S;
  S.n = static_cast<int>(M.rows());
  S.rows.resize(S.n);
  for (int i = 0; i < S.n; ++i) {
    for (int j = 0; j < S.n; ++j) {
      if (std::abs(M(i, j)) > drop) S.rows[i].emplace_back(j, M(i, j));
    }
    S.sparsity = std::max(S.sparsity, static_cast<int>(S.rows[i].size()));
  }
  return S;
}

CMatrix sparse_to_dense(const SparseMatrix& S) {
  check_sparse(S, "sparse_to_dense");
  CMatrix M = CMatrix::Zero(S.n, S.n);
  for (int i = 0; i < S.n; ++i) {
    for (const auto& entry : S.rows[i]) M(i, entry.first) = entry.second;
  }
  return M;
}

CVector sparse_apply(const SparseMatrix& S, const CVector& x) {
  if (x.size() != S.n) {
    throw DimensionError("sparse_apply: vector length does not match n");
  }
  return apply_raw(S, x);
}

double sparse_row_bound(const SparseMatrix& S) {
  check_sparse(S, "sparse_row_bound");
  double best = 0.0;
  for (const auto& row : S.rows) {
    double acc = 0.0;
    for (const auto& entry : row) acc += std::abs(entry.second);
    best = std::max(best, acc);
  }
  return best;
}

SparseMatrix lattice(int dims, int side, Complex hop, Complex onsite) {
  if (dims < 1 || dims > 3) {
    throw PreconditionError("lattice: dims must be 1, 2, or 3");
  }
  if (side < 1) throw PreconditionError("lattice: side must be positive");
  int n = 1;
  for (int d = 0; d < dims; ++d) n *= side;
  SparseMatrix S;
  S.n = n;
  S.rows.resize(n);
  int stride[3] = {1, side, side * side};
  for (int idx = 0; idx < n; ++idx) {
    auto& row = S.rows[idx];
    for (int d = 0; d < dims; ++d) {
      int coord = (idx / stride[d]) % side;
      if (coord > 0) row.emplace_back(idx - stride[d], hop);
    }
    if (onsite != Complex(0.0, 0.0)) row.emplace_back(idx, onsite);
    for (int d = dims - 1; d >= 0; --d) {
      int coord = (idx / stride[d]) % side;
      if (coord < side - 1) row.emplace_back(idx + stride[d], hop);
    }
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    S.sparsity = std::max(S.sparsity, static_cast<int>(row.size()));
  }
  return S;
}

KrylovBasis build_krylov(const SparseMatrix& op, const CVector& start, int m,
                         OpCounters* counters) {
  MemTracker mem;
  KrylovBasis basis = build_impl(op, start, m, counters, mem);
  merge_highwater(counters, mem);
  return basis;
}

Complex krylov_entry(const SparseMatrix& pA, const SparseMatrix& pB,
                     const SparseMatrix& C, const SparseMatrix& D, int j, int k,
                     double t, int m, int Rquad, OpCounters* counters) {
  check_shared(pA, pB, C, j, k, t, "krylov_entry");
  check_sparse(D, "krylov_entry");
  if (D.n != pA.n) {
    throw DimensionError("krylov_entry: matrix dimensions disagree");
  }
  MemTracker mem;
  KrylovBasis KA = build_impl(pA, unit_start(pA.n, j), m, counters, mem);
  KrylovBasis KB = build_impl(pB, unit_start(pB.n, k), m, counters, mem);
  CMatrix Ctil = compress(C, KA, KB, counters, mem);
  CMatrix Dtil = compress(D, KA, KB, counters, mem);
  if (Rquad <= 0) {
    Rquad = 8 + static_cast<int>(
                    std::ceil(t * std::max(sparse_row_bound(pA),
                                           sparse_row_bound(pB))));
  }
  Eigen::VectorXd xs, ws;
  detail::gauss_legendre_01(Rquad, xs, ws);
  mem.add(KA.m + KB.m);
  Complex acc{0.0, 0.0};
  for (int q = 0; q < Rquad; ++q) {
    acc += t * ws(q) *
           expm_col0_sandwich(KA.projected, KB.projected, Ctil, t * xs(q),
                              counters);
  }
  acc += expm_col0_sandwich(KA.projected, KB.projected, Dtil, t, counters);
  mem.sub(KA.m + KB.m);
  merge_highwater(counters, mem);
  return acc;
}

Complex restarted_entry(const SparseMatrix& pA, const SparseMatrix& pB,
                        const SparseMatrix& C, int j, int k, double t,
                        int mPrime, double r, OpCounters* counters) {
  check_shared(pA, pB, C, j, k, t, "restarted_entry");
  if (!(r > 0.0)) {
    throw PreconditionError("restarted_entry: segment length must be positive");
  }
  MemTracker mem;
  int L = std::max(1, static_cast<int>(std::ceil(t / r - 1e-12)));
  CVector u = unit_start(pA.n, j);
  CVector w = unit_start(pB.n, k);
  mem.add(2LL * pA.n);
  double rbA = sparse_row_bound(pA);
  double rbB = sparse_row_bound(pB);
  double rbMax = std::max(rbA, rbB);
  Complex acc{0.0, 0.0};
  for (int l = 0; l < L; ++l) {
    double s0 = l * r;
    double seg = std::min(r, t - s0);
    if (!(seg > 0.0)) break;
    KrylovBasis KA = build_impl(pA, u, mPrime, counters, mem);
    KrylovBasis KB = build_impl(pB, w, mPrime, counters, mem);
    CMatrix Ctil = compress(C, KA, KB, counters, mem);
    double scale = norm_counted(u, counters) * norm_counted(w, counters);
    free_columns(KA, mem);
    free_columns(KB, mem);
    int nodes = 8 + static_cast<int>(std::ceil(seg * rbMax));
    Eigen::VectorXd xs, ws;
    detail::gauss_legendre_01(nodes, xs, ws);
    mem.add(KA.m + KB.m);
    for (int q = 0; q < nodes; ++q) {
      acc += seg * ws(q) * scale *
             expm_col0_sandwich(KA.projected, KB.projected, Ctil, seg * xs(q),
                                counters);
    }
    mem.sub(KA.m + KB.m);
    mem.sub(static_cast<long long>(KA.m) * KB.m);  // Ctil
    free_projected(KA, mem);
    free_projected(KB, mem);
    if (l + 1 < L) {
      advance_seed(pA, u, seg, rbA, counters, mem);
      advance_seed(pB, w, seg, rbB, counters, mem);
    }
  }
  mem.sub(2LL * pA.n);
  merge_highwater(counters, mem);
  return acc;
}

}  // namespace sylverse
