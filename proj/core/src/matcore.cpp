#include "sylverse/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sylverse/errors.hpp"

namespace sylverse {

namespace {

// sqrt(||M||_1 ||M||_inf) bounds the spectral norm from above.
double norm_upper_bound(const CMatrix& M) {
  if (M.size() == 0) return 0.0;
  double n1 = M.cwiseAbs().colwise().sum().maxCoeff();
  double ni = M.cwiseAbs().rowwise().sum().maxCoeff();
  return std::sqrt(n1 * ni);
}

}  // namespace

CMatrix expm(const CMatrix& M, double tol) {
  if (M.rows() != M.cols()) throw DimensionError("expm: matrix must be square");
  if (!(tol > 1e-15) || !(tol < 1e-2))
    throw PreconditionError("expm: tol must lie in (1e-15, 1e-2)");

  const Eigen::Index n = M.rows();
  if (n == 0) return CMatrix(0, 0);

  int s = 0;
  double bound = norm_upper_bound(M);
  while (bound > 0.5 && s < 60) {
    bound *= 0.5;
    ++s;
  }

  // With the scaled norm at most 1/2, the tail past order K is below
  // 2 * 0.5^(K+1) / (K+1)!. Push it under target / 2^s so the s squarings
  // cannot lift it above the requested tolerance.
  double target = std::min(tol, 1e-13) / std::ldexp(1.0, std::min(s, 40));
  int K = 3;
  double tail = 2.0 * std::pow(0.5, K + 1) / 24.0;  // (K+1)! = 4! at K = 3
  double fact = 24.0;
  while (tail > target && K < 40) {
    ++K;
    fact *= (K + 1);
    tail = 2.0 * std::pow(0.5, K + 1) / fact;
  }

  CMatrix Ms = M / std::ldexp(1.0, s);
  CMatrix term = CMatrix::Identity(n, n);
  CMatrix sum = term;
  for (int k = 1; k <= K; ++k) {
    term = (term * Ms) / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

double spectral_norm(const CMatrix& M) {
  if (M.size() == 0) return 0.0;
  if (std::max(M.rows(), M.cols()) <= 512) {
    Eigen::BDCSVD<CMatrix> svd(M);
    return svd.singularValues()(0);
  }

  // Power iteration on G = M^dagger M, all-ones start. The Rayleigh quotient
  // converges twice as fast as the iterate, so a 1e-12 stall test on it
  // clears the documented 1e-10 relative accuracy.
  CVector v = CVector::Ones(M.cols());
  v /= v.norm();
  double prev = -1.0;
  for (int it = 0; it < 100000; ++it) {
    CVector w = M.adjoint() * (M * v);
    double wn = w.norm();
    if (wn == 0.0) return 0.0;
    double est = std::sqrt(wn);  // ||Gv|| with unit v estimates sigma^2
    v = w / wn;
    if (prev >= 0.0 && std::abs(est - prev) <= 1e-12 * est) return est;
    prev = est;
  }
  return prev;
}

double log_norm(const CMatrix& M) {
  if (M.rows() != M.cols()) throw DimensionError("log_norm: matrix must be square");
  if (M.size() == 0) return 0.0;
  CMatrix H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

CVector solve_dense(const CMatrix& A, const CVector& b) {
  if (A.rows() != A.cols()) throw DimensionError("solve_dense: matrix must be square");
  if (A.rows() != b.size())
    throw DimensionError("solve_dense: right-hand side length mismatch");
  const Eigen::Index n = A.rows();
  if (n == 0) return CVector(0);

  Eigen::PartialPivLU<CMatrix> lu(A);
  double scale = A.cwiseAbs().maxCoeff();
  double cutoff = static_cast<double>(n) * 2.220446049250313e-16 * scale;
  auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(diag(i)) <= cutoff) {
      throw SingularityError(
          "solve_dense: negligible pivot at index " + std::to_string(i),
          static_cast<int>(i));
    }
  }
  return lu.solve(b);
}

namespace {

struct GLPoint {
  double node;
  double weight;
};

// 15-point Gauss-Legendre rule on [-1, 1], nodes ascending.
constexpr GLPoint kGL15[15] = {
    {-0.9879925180204854, 0.030753241996118647},
    {-0.937273392400706, 0.07036604748810807},
    {-0.8482065834104272, 0.10715922046717177},
    {-0.7244177313601701, 0.1395706779261539},
    {-0.5709721726085388, 0.16626920581699378},
    {-0.3941513470775634, 0.18616100001556188},
    {-0.20119409399743451, 0.19843148532711125},
    {0.0, 0.2025782419255609},
    {0.20119409399743451, 0.19843148532711125},
    {0.3941513470775634, 0.18616100001556188},
    {0.5709721726085388, 0.16626920581699378},
    {0.7244177313601701, 0.1395706779261539},
    {0.8482065834104272, 0.10715922046717177},
    {0.937273392400706, 0.07036604748810807},
    {0.9879925180204854, 0.030753241996118647},
};

CMatrix gl15_panel(const std::function<CMatrix(double)>& f, double lo, double hi,
                   long& evals) {
  double c = 0.5 * (lo + hi);
  double r = 0.5 * (hi - lo);
  CMatrix acc;
  for (int i = 0; i < 15; ++i) {  // ascending abscissas keep runs bit-identical
    CMatrix v = f(c + r * kGL15[i].node);
    ++evals;
    if (i == 0)
      acc = kGL15[i].weight * v;
    else
      acc += kGL15[i].weight * v;
  }
  return acc * r;
}

}  // namespace

CMatrix quad_integrate(const std::function<CMatrix(double)>& f, double lo, double hi,
                       double tol) {
  if (!(tol > 0)) throw PreconditionError("quad_integrate: tol must be positive");
  if (!(hi >= lo)) throw PreconditionError("quad_integrate: interval must satisfy lo <= hi");
  if (hi == lo) {
    CMatrix probe = f(lo);
    return CMatrix::Zero(probe.rows(), probe.cols());
  }

  constexpr long kBudget = 1000000;
  long evals = 0;
  double span = hi - lo;

  struct Item {
    double lo, hi;
    CMatrix whole;
  };
  std::vector<Item> stack;
  stack.push_back({lo, hi, gl15_panel(f, lo, hi, evals)});

  CMatrix result;
  bool have_result = false;
  auto add = [&](const CMatrix& v) {
    if (have_result)
      result += v;
    else {
      result = v;
      have_result = true;
    }
  };

  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    double mid = 0.5 * (it.lo + it.hi);
    CMatrix left = gl15_panel(f, it.lo, mid, evals);
    CMatrix right = gl15_panel(f, mid, it.hi, evals);
    double err = (it.whole - left - right).cwiseAbs().maxCoeff();
    if (err <= tol * ((it.hi - it.lo) / span)) {
      add(left + right);  // pieces accumulate left to right, deterministically
      continue;
    }
    if (evals + 30 > kBudget || mid <= it.lo || mid >= it.hi) {
      throw AccuracyError("quad_integrate: evaluation budget exhausted", err);
    }
    stack.push_back({mid, it.hi, std::move(right)});
    stack.push_back({it.lo, mid, std::move(left)});
  }
  return result;
}

double quad_integrate_scalar(const std::function<double(double)>& f, double lo,
                             double hi, double tol) {
  auto wrap = [&f](double s) {
    CMatrix m(1, 1);
    m(0, 0) = f(s);
    return m;
  };
  CMatrix out = quad_integrate(wrap, lo, hi, tol);
  return out(0, 0).real();
}

}  // namespace sylverse
