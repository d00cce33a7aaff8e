#include "sylverse/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "json.hpp"
#include "sylverse/errors.hpp"
#include "sylverse/lchsmodel.hpp"
#include "sylverse/util.hpp"

namespace sylverse {

namespace {

constexpr double kE2 = 7.3890560989306495;  // e^2

}  // namespace

CMatrix exact_IC(const MatrixODEProblem& p, double h, double tol) {
  if (h < 0.0) throw PreconditionError("exact_IC: h must be nonnegative");
  return quad_integrate(
      [&](double tau) {
        return CMatrix(expm(tau * p.A).adjoint() * p.C * expm(tau * p.B));
      },
      0.0, h, tol);
}

CMatrix taylor_IC(const MatrixODEProblem& p, double h, int K) {
  double hmax = std::min(1.0 / p.a, 1.0 / p.b);
  if (h < 0.0 || h > hmax * (1.0 + 1e-12))
    throw PreconditionError("taylor_IC: step must satisfy h <= min(1/a, 1/b)");
  if (K < 0) throw PreconditionError("taylor_IC: K must be nonnegative");

  // leftPow[p] = (h A^dag)^p / p! applied to C; rightPow[q] = (h B)^q / q!.
  std::vector<CMatrix> leftC(K + 1), rightPow(K + 1);
  leftC[0] = p.C;
  CMatrix hAd = h * p.A.adjoint();
  for (int k = 1; k <= K; ++k) leftC[k] = hAd * leftC[k - 1] / static_cast<double>(k);
  rightPow[0] = CMatrix::Identity(p.n, p.n);
  CMatrix hB = h * p.B;
  for (int k = 1; k <= K; ++k)
    rightPow[k] = rightPow[k - 1] * hB / static_cast<double>(k);

  CMatrix sum = CMatrix::Zero(p.n, p.n);
  for (int pp = 0; pp <= K; ++pp)
    for (int qq = 0; qq <= K; ++qq)
      sum += leftC[pp] * rightPow[qq] * (h / (pp + qq + 1.0));
  return sum;
}

ClockBlockOperator build_clock_operator(const MatrixODEProblem& p, int M, int R,
                                        int K) {
  if (M < 1 || R < 1)
    throw PreconditionError("build_clock_operator: M and R must be at least 1");
  double h = p.t / M;
  ClockBlockOperator op;
  op.M = M;
  op.R = R;
  op.perStepBlock = taylor_IC(p, h, K);
  op.paddingBlock = p.D / static_cast<double>(R);
  op.lambda = std::max(p.c * h * kE2, p.d / R);
  return op;
}

Complex estimate_entry(const MatrixODEProblem& p, int M, int R, int K,
                       EntryRoute route) {
  ClockBlockOperator op = build_clock_operator(p, M, R, K);

  HistoryState hA, hB;
  if (route == EntryRoute::linear_systems) {
    BlockLinearSystem sysA = build_system(p, SideSelector::A_side, M, R, K);
    BlockLinearSystem sysB = build_system(p, SideSelector::B_side, M, R, K);
    hA = solve_history(sysA, p.phi);
    hB = solve_history(sysB, p.psi);
  } else {
    hA = lchs_history(p, SideSelector::A_side, M, R);
    hB = lchs_history(p, SideSelector::B_side, M, R);
  }

  int L = M + R;
  std::vector<Complex> terms(L);
  parallel_for_ordered(static_cast<std::size_t>(L), [&](std::size_t m) {
    const CMatrix& block =
        static_cast<int>(m) < M ? op.perStepBlock : op.paddingBlock;
    terms[m] = hA.blocks[m].dot(block * hB.blocks[m]);
  });
  Complex acc = 0.0;
  for (const Complex& term : terms) acc += term;
  return acc;
}

std::map<std::string, double> error_budget(const MatrixODEProblem& p, int M,
                                           int R) {
  LFunctionals f = compute_L_functionals(p, M, R, 1e-8);
  double mu = std::max(p.a, p.b);
  double third = p.eps / 3.0;
  return {{"hist", third / (p.c * f.Ltilde2)},
          {"overlap", third / (p.c * f.Ltilde2)},
          {"truncation", third / (mu * f.Ltilde2)}};
}

std::string entry_report_json(const MatrixODEProblem& p, int M, int R, int K,
                              EntryRoute route) {
  Complex entry = estimate_entry(p, M, R, K, route);
  nlohmann::json j;
  j["entry"] = {entry.real(), entry.imag()};
  j["budget"] = error_budget(p, M, R);
  j["M"] = M;
  j["R"] = R;
  j["K"] = K;
  return j.dump();
}

}  // namespace sylverse
