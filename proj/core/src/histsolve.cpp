#include "sylverse/histsolve.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "sampling.hpp"
#include "sylverse/errors.hpp"

namespace sylverse {

namespace {

constexpr int kDenseCap = 4096;

CMatrix taylor_stepper(const CMatrix& Y, double h, int K) {
  CMatrix term = CMatrix::Identity(Y.rows(), Y.cols());
  CMatrix sum = term;
  for (int k = 1; k <= K; ++k) {
    term = term * (h * Y) / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

struct SideView {
  const CMatrix& Y;
  const CVector& x;
  double bound;
  double xi;
};

SideView side_of(const MatrixODEProblem& p, SideSelector which) {
  if (which == SideSelector::A_side) return {p.A, p.phi, p.a, p.xiA};
  return {p.B, p.psi, p.b, p.xiB};
}

const CMatrix& stepper_for_row(const BlockLinearSystem& sys, int m) {
  if (sys.steppers.size() == 1) return sys.steppers[0];
  return sys.steppers[m - 1];
}

}  // namespace

int default_M(const MatrixODEProblem& p) {
  double mu = std::max(p.a, p.b);
  return std::max(1, static_cast<int>(std::ceil(p.t * mu)));
}

int default_R(const MatrixODEProblem& p) {
  double mu = std::max(p.a, p.b);
  return std::max(1, static_cast<int>(std::ceil(mu * p.d / p.c)));
}

int default_K(const MatrixODEProblem& p, int M, int R) {
  double h = p.t / std::max(1, M);
  double target = p.eps / (10.0 * (M + R));
  double numer = 2.0 * 7.3890560989306495 * p.c * h;  // 2 e^2 c h
  int K = 0;
  double fact = 1.0;  // (K+1)!
  while (numer / fact > target && K < 40) {
    ++K;
    fact *= (K + 1);
  }
  return K;
}

BlockLinearSystem build_system(const MatrixODEProblem& p, SideSelector which, int M,
                               int R, int K) {
  if (M < 1 || R < 1)
    throw PreconditionError("build_system: M and R must be at least 1");
  if (K < 0) throw PreconditionError("build_system: K must be nonnegative");
  SideView side = side_of(p, which);
  double h = p.t / M;
  if (side.bound * h > 1.0 + 1e-12) {
    int suggestion = static_cast<int>(std::ceil(p.t * side.bound));
    throw PreconditionError(
        "build_system: step rule violated (norm bound times h exceeds 1); "
        "increase M to at least " +
        std::to_string(suggestion));
  }

  BlockLinearSystem sys;
  sys.M = M;
  sys.R = R;
  sys.N = p.n;
  sys.h = h;
  sys.K = K;
  sys.steppers.push_back(taylor_stepper(side.Y, h, K));

  int L = M + R;
  long dim = static_cast<long>(L) * p.n;
  sys.rhs = CVector::Zero(dim);
  sys.rhs.head(p.n) = side.x;

  if (dim <= kDenseCap) {
    const CMatrix& V = sys.steppers[0];
    CMatrix I = CMatrix::Identity(p.n, p.n);
    sys.assembled = CMatrix::Zero(dim, dim);
    for (int m = 0; m < L; ++m) {
      sys.assembled.block(m * p.n, m * p.n, p.n, p.n) = I;
      if (m >= 1) {
        sys.assembled.block(m * p.n, (m - 1) * p.n, p.n, p.n) = (m <= M) ? -V : -I;
      }
    }
  }
  return sys;
}

HistoryState solve_history(const BlockLinearSystem& sys, const CVector& x_in) {
  if (x_in.size() != sys.N)
    throw DimensionError("solve_history: x_in must have the system block size");
  int L = sys.M + sys.R;
  HistoryState hs;
  hs.M = sys.M;
  hs.R = sys.R;
  hs.ordering = HistoryOrdering::standard;
  hs.blocks.resize(L);

  if (sys.assembled.size() > 0) {
    CVector rhs = CVector::Zero(static_cast<long>(L) * sys.N);
    rhs.head(sys.N) = x_in;
    CVector sol = solve_dense(sys.assembled, rhs);
    for (int m = 0; m < L; ++m) hs.blocks[m] = sol.segment(m * sys.N, sys.N);
  } else {
    hs.blocks[0] = x_in;
    for (int m = 1; m < L; ++m) {
      if (m <= sys.M)
        hs.blocks[m] = stepper_for_row(sys, m) * hs.blocks[m - 1];
      else
        hs.blocks[m] = hs.blocks[m - 1];
    }
  }

  double sq = 0.0;
  for (const CVector& b : hs.blocks) sq += b.squaredNorm();
  hs.normSq = sq;
  return hs;
}

std::vector<std::vector<CMatrix>> invert_blocks(const BlockLinearSystem& sys) {
  if (sys.assembled.size() == 0)
    throw PreconditionError("invert_blocks: dense assembly required ((M+R)N <= 4096)");
  CMatrix inv = sys.assembled.partialPivLu().inverse();
  int L = sys.M + sys.R;
  std::vector<std::vector<CMatrix>> blocks(L, std::vector<CMatrix>(L));
  for (int m = 0; m < L; ++m)
    for (int n = 0; n < L; ++n)
      blocks[m][n] = inv.block(m * sys.N, n * sys.N, sys.N, sys.N);
  return blocks;
}

ConditionCertificate certify_condition(const BlockLinearSystem& sys,
                                       const MatrixODEProblem& p, SideSelector which) {
  if (sys.assembled.size() == 0)
    throw PreconditionError("certify_condition: dense assembly required");
  SideView side = side_of(p, which);
  int M = sys.M, R = sys.R, L = M + R;

  ConditionCertificate cert;
  cert.M = M;
  cert.R = R;
  cert.K = sys.K;
  cert.normA = spectral_norm(sys.assembled);
  cert.normAinv = spectral_norm(sys.assembled.partialPivLu().inverse());
  cert.kappa = cert.normA * cert.normAinv;

  // Norms of the stepper powers drive the row/column sums of the closed-form
  // inverse blocks V^{max(0, min(m,M)-n)}.
  std::vector<double> vnorm(M + 1);
  vnorm[0] = 1.0;
  CMatrix Vm = CMatrix::Identity(sys.N, sys.N);
  for (int m = 1; m <= M; ++m) {
    Vm = sys.steppers[0] * Vm;
    vnorm[m] = spectral_norm(Vm);
  }
  double rowMax = 0.0, colMax = 0.0;
  for (int m = 0; m < L; ++m) {
    double acc = 0.0;
    for (int n = 0; n <= m; ++n) acc += vnorm[std::max(0, std::min(m, M) - n)];
    rowMax = std::max(rowMax, acc);
  }
  for (int n = 0; n < L; ++n) {
    double acc = 0.0;
    for (int m = n; m < L; ++m) acc += vnorm[std::max(0, std::min(m, M) - n)];
    colMax = std::max(colMax, acc);
  }
  cert.rowSumBound = rowMax;
  cert.colSumBound = colMax;

  // Budget from the growth curve of the exact flow plus the explicit
  // stepper-sequence truncation slack.
  CMatrix E1 = expm(sys.h * side.Y, 1e-13);
  double sumExp = 0.0;
  CMatrix P = CMatrix::Identity(sys.N, sys.N);
  for (int m = 1; m <= M; ++m) {
    P = E1 * P;
    sumExp += spectral_norm(P);
  }
  double maxExp = detail::max_exp_norm(side.Y, p.t);
  double delta = spectral_norm(sys.steppers[0] - E1) + 1e-13;
  double epsPrime = maxExp * delta * M * std::exp(delta * M);
  cert.paperBound = 1.0 + sumExp + R * maxExp + (M + R) * epsPrime;

  cert.pass = cert.normAinv <= cert.paperBound &&
              cert.normA <= 1.0 + 2.718281828459045;
  return cert;
}

std::pair<double, double> block_norm_bound(
    const std::vector<std::vector<CMatrix>>& blocks) {
  if (blocks.empty() || blocks[0].empty())
    throw DimensionError("block_norm_bound: empty block grid");
  size_t cols = blocks[0].size();
  long totalRows = 0, totalCols = 0;
  for (const auto& row : blocks) {
    if (row.size() != cols)
      throw DimensionError("block_norm_bound: ragged block grid");
    totalRows += row[0].rows();
  }
  for (size_t j = 0; j < cols; ++j) totalCols += blocks[0][j].cols();

  CMatrix big = CMatrix::Zero(totalRows, totalCols);
  CMatrix compressed(blocks.size(), cols);
  long roff = 0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    long coff = 0;
    long rh = blocks[i][0].rows();
    for (size_t j = 0; j < cols; ++j) {
      const CMatrix& blk = blocks[i][j];
      if (blk.rows() != rh || blk.cols() != blocks[0][j].cols())
        throw DimensionError("block_norm_bound: nonconformal block shapes");
      big.block(roff, coff, blk.rows(), blk.cols()) = blk;
      compressed(i, j) = spectral_norm(blk);
      coff += blk.cols();
    }
    roff += rh;
  }
  return {spectral_norm(big), spectral_norm(compressed)};
}

std::pair<HistoryState, std::vector<double>> precondition(const MatrixODEProblem& p,
                                                          SideSelector which, int M,
                                                          int R, int K) {
  SideView side = side_of(p, which);
  if (!std::isfinite(side.xi))
    throw PreconditionError("precondition: log-norm bound must be finite");

  MatrixODEProblem shifted = p;
  CMatrix I = CMatrix::Identity(p.n, p.n);
  if (which == SideSelector::A_side) {
    shifted.A = p.A - side.xi * I;
    shifted.a = p.a + std::abs(side.xi);
    shifted.xiA = 0.0;
  } else {
    shifted.B = p.B - side.xi * I;
    shifted.b = p.b + std::abs(side.xi);
    shifted.xiB = 0.0;
  }

  BlockLinearSystem sys = build_system(shifted, which, M, R, K);
  HistoryState hs = solve_history(sys, side.x);
  std::vector<double> weights(hs.blocks.size());
  for (size_t m = 0; m < weights.size(); ++m)
    weights[m] = std::exp(sys.h * std::min<int>(static_cast<int>(m), M) * side.xi);
  return {std::move(hs), std::move(weights)};
}

std::string certificate_json(const ConditionCertificate& cert) {
  nlohmann::json j;
  j["M"] = cert.M;
  j["R"] = cert.R;
  j["K"] = cert.K;
  j["normA"] = cert.normA;
  j["normAinv"] = cert.normAinv;
  j["kappa"] = cert.kappa;
  j["paperBound"] = cert.paperBound;
  j["pass"] = cert.pass;
  return j.dump();
}

}  // namespace sylverse
