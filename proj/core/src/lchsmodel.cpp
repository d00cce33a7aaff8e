#include "sylverse/lchsmodel.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "sampling.hpp"
#include "sylverse/errors.hpp"

namespace sylverse {

namespace {

struct SideView {
  const CMatrix& Y;
  const CVector& x;
  double xi;
};

SideView side_of(const MatrixODEProblem& p, SideSelector which) {
  if (which == SideSelector::A_side) return {p.A, p.phi, p.xiA};
  return {p.B, p.psi, p.xiB};
}

// int_0^t e^{2 s xi} ds via expm1 to stay accurate for small shifts.
double envelope_integral(double xi, double t) {
  if (xi == 0.0) return t;
  return std::expm1(2.0 * t * xi) / (2.0 * xi);
}

}  // namespace

HistoryState lchs_history(const MatrixODEProblem& p, SideSelector which, int M,
                          int R) {
  if (M < 1) throw PreconditionError("lchs_history: M must be at least 1");
  if (R < 0) throw PreconditionError("lchs_history: R must be nonnegative");
  SideView side = side_of(p, which);
  double h = p.t / M;

  CMatrix I = CMatrix::Identity(p.n, p.n);
  CMatrix E = expm(h * (side.Y - side.xi * I));

  HistoryState hs;
  hs.M = M;
  hs.R = R;
  hs.ordering = HistoryOrdering::standard;
  hs.blocks.resize(M + R);
  CVector cur = side.x;
  for (int m = 0; m < M + R; ++m) {
    if (m >= 1 && m <= M) cur = E * cur;
    hs.blocks[m] = std::exp(h * std::min(m, M) * side.xi) * cur;
  }

  if (side.xi == 0.0) {
    hs.normSq = static_cast<double>(M + R);
  } else {
    double q = 2.0 * h * side.xi;
    hs.normSq = std::expm1(q * M) / std::expm1(q) +
                R * std::exp(2.0 * p.t * side.xi);
  }
  return hs;
}

LFunctionals compute_L_functionals(const MatrixODEProblem& p, int M, int R,
                                   double quadTol) {
  if (M < 1) throw PreconditionError("compute_L_functionals: M must be at least 1");
  if (R < 0)
    throw PreconditionError("compute_L_functionals: R must be nonnegative");
  if (!(quadTol > 0.0))
    throw PreconditionError("compute_L_functionals: quadTol must be positive");

  double ratio = p.d / p.c;
  double la = envelope_integral(p.xiA, p.t) + ratio * std::exp(2.0 * p.t * p.xiA);
  double lb = envelope_integral(p.xiB, p.t) + ratio * std::exp(2.0 * p.t * p.xiB);

  LFunctionals f;
  f.Lcal = std::max(la, lb);
  f.L2 = std::sqrt(la * lb);

  double maxA = detail::max_exp_norm(p.A, p.t);
  double maxB = detail::max_exp_norm(p.B, p.t);
  f.maxExp = std::max(maxA, maxB);

  double intA = detail::integral_exp_norm(p.A, p.t, quadTol);
  double intB = detail::integral_exp_norm(p.B, p.t, quadTol);
  f.Ltilde1 = std::max(intA + ratio * maxA, intB + ratio * maxB);

  auto state_factor = [&](const CMatrix& Y, const CVector& x) {
    double integ = quad_integrate_scalar(
        [&](double s) { return (expm(s * Y) * x).squaredNorm(); }, 0.0, p.t,
        quadTol);
    return integ + ratio * (expm(p.t * Y) * x).squaredNorm();
  };
  f.Ltilde2 = std::sqrt(state_factor(p.A, p.phi) * state_factor(p.B, p.psi));
  return f;
}

std::string functional_report_json(const LFunctionals& f, double quadTol) {
  nlohmann::json j;
  j["Lcal"] = f.Lcal;
  j["L2"] = f.L2;
  j["Ltilde1"] = f.Ltilde1;
  j["Ltilde2"] = f.Ltilde2;
  j["maxExp"] = f.maxExp;
  j["quadTol"] = quadTol;
  return j.dump();
}

}  // namespace sylverse
