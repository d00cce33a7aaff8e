#include "sylverse/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <vector>

#include "json.hpp"
#include "sylverse/errors.hpp"
#include "sylverse/matcore.hpp"

namespace sylverse {

double clamped_log2(double x) { return x > 2.0 ? std::log2(x) : 1.0; }

namespace {

constexpr double kQuadTol = 1e-9;

// Everything the displayed formulas consume. Derivative bounds are zero for
// constant-coefficient instances, which clamps their logarithms to one.
struct Inputs {
  double t = 0.0, eps = 0.0;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double derivA = 0.0, derivB = 0.0, derivC = 0.0;
  LFunctionals f;
};

void check_usable(double t, double eps, double a, double b, double c,
                  double d) {
  if (!(t > 0.0))
    throw PreconditionError("evaluate_costs: t must be positive");
  if (!(eps > 0.0))
    throw PreconditionError("evaluate_costs: eps must be positive");
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
    throw PreconditionError("evaluate_costs: norm bounds a, b, c must be positive");
  if (d < 0.0)
    throw PreconditionError("evaluate_costs: d must be nonnegative");
}

CostReport assemble(const Inputs& in, EntryRoute route, CostRegime regime) {
  CostReport r;
  r.route = route;
  r.regime = regime;
  r.mu = std::max(in.a, in.b);
  r.functionals = in.f;
  const double t = in.t, eps = in.eps, c = in.c, mu = r.mu;
  // d divides one logarithm argument; flooring it at eps keeps a vanishing
  // D bound from blowing the displayed log to infinity.
  const double dEff = std::max(in.d, eps);

  if (route == EntryRoute::linear_systems) {
    const double base = c * in.f.Ltilde2 / eps;
    r.queries_state_prep = base * mu * in.f.Ltilde1 * clamped_log2(base);
    r.queries_AB =
        r.queries_state_prep *
        clamped_log2(t * mu * c * c * in.f.Ltilde2 * in.f.Ltilde1 / (dEff * eps));
    r.queries_CD = base;
    if (regime == CostRegime::time_independent) {
      const double lgT = clamped_log2(t * mu);
      r.gates_extra = base * mu * in.f.Ltilde1 * lgT * lgT;
      r.headline_queries = (c / eps) * mu * in.f.Ltilde1 * in.f.Ltilde1 *
                           in.f.maxExp * lgT;
    } else {
      const double darg =
          std::max({t * in.derivA, t * in.derivB, in.derivC / c}) / mu;
      r.gates_extra =
          base * mu * in.f.Ltilde1 * clamped_log2(t * mu) * clamped_log2(darg);
      r.headline_queries =
          (mu * c / eps) * in.f.Ltilde1 * in.f.Ltilde2 * clamped_log2(t * mu);
    }
  } else {
    const double base = c * in.f.L2 / eps;
    r.queries_state_prep = base;
    r.queries_CD = base;
    if (regime == CostRegime::time_independent) {
      r.queries_AB = base * t * mu * clamped_log2(base);
      r.gates_extra = base * (t * mu + mu * in.d / c);
    } else {
      r.queries_AB = base * t * mu * clamped_log2(base) *
                     clamped_log2(t * mu * c * in.f.L2 * clamped_log2(base) / eps);
      const double gt = std::max({t / in.a, t / in.b, t * t});
      const double darg = std::max(
          {gt * in.derivA, gt * in.derivB, in.derivC / (c * mu)});
      r.gates_extra = base * (t * mu + mu * in.d / c) * clamped_log2(t * mu) *
                      clamped_log2(base) * clamped_log2(darg);
    }
    r.headline_queries = (c * in.f.Lcal / eps) * t * mu;
  }

  r.lower_bound = in.f.Lcal * t / eps;
  r.ratio_upper_to_lower =
      (r.queries_state_prep + r.queries_AB + r.queries_CD) / r.lower_bound;
  return r;
}

// Piecewise-linear bound through samples at j t / J for j = 0..J-1, held
// constant past the last sample; the same grid convention the coefficient
// interpolation uses. integral() is the exact antiderivative.
class XiCurve {
 public:
  XiCurve(const std::vector<double>& xs, double t)
      : xs_(xs), t_(t), J_(static_cast<int>(xs.size())), h_(t / J_) {
    cum_.assign(J_, 0.0);
    for (int j = 0; j + 1 < J_; ++j)
      cum_[j + 1] = cum_[j] + 0.5 * h_ * (xs_[j] + xs_[j + 1]);
  }

  double integral(double s) const {
    if (s <= 0.0) return 0.0;
    const double last = h_ * (J_ - 1);
    if (s >= last) return cum_[J_ - 1] + (s - last) * xs_[J_ - 1];
    int j = std::min(static_cast<int>(s / h_), J_ - 2);
    const double u = s - j * h_;
    const double slope = (xs_[j + 1] - xs_[j]) / h_;
    return cum_[j] + u * xs_[j] + 0.5 * u * u * slope;
  }

  double total() const { return integral(t_); }

  // Knots, interior zero crossings, and both endpoints: the integral is
  // monotone between consecutive candidates, so its extrema live here.
  std::vector<double> candidates() const {
    std::vector<double> out{0.0};
    for (int j = 1; j < J_; ++j) out.push_back(j * h_);
    for (int j = 0; j + 1 < J_; ++j) {
      const double x0 = xs_[j], x1 = xs_[j + 1];
      if ((x0 > 0.0 && x1 < 0.0) || (x0 < 0.0 && x1 > 0.0))
        out.push_back(j * h_ + h_ * x0 / (x0 - x1));
    }
    out.push_back(t_);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::vector<double> xs_;
  double t_ = 0.0;
  int J_ = 0;
  double h_ = 0.0;
  std::vector<double> cum_;
};

// max_{s' >= s} e^{I(s') - I(s)}: exact, because both the maximizing s' and
// the prefix-minimizing s are candidate points.
double envelope_max_exp(const XiCurve& xi) {
  double best = 0.0;
  double minSoFar = std::numeric_limits<double>::infinity();
  for (double s : xi.candidates()) {
    const double v = xi.integral(s);
    minSoFar = std::min(minSoFar, v);
    best = std::max(best, v - minSoFar);
  }
  return std::exp(best);
}

// Maximum of a smooth scalar over [lo, hi]: 65-point scan plus
// golden-section refinement of the bracket around the best sample.
double scan_max(const std::function<double(double)>& g, double lo, double hi) {
  constexpr int kSamples = 65;
  double best = g(lo), sbest = lo;
  for (int i = 1; i < kSamples; ++i) {
    const double s = lo + (hi - lo) * i / (kSamples - 1);
    const double v = g(s);
    if (v > best) {
      best = v;
      sbest = s;
    }
  }
  const double step = (hi - lo) / (kSamples - 1);
  double a = std::max(lo, sbest - step), b = std::min(hi, sbest + step);
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 60 && b - a > 1e-12 * (hi - lo); ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = g(x2);
    }
  }
  return std::max({best, f1, f2});
}

// int_0^t e^{2 (I(t) - I(s))} ds + ratio e^{2 I(t)}: the xi-integrated side
// factor of the L2 functional.
double envelope_side(const XiCurve& xi, double t, double ratio) {
  const double It = xi.total();
  const double integ = quad_integrate_scalar(
      [&](double s) { return std::exp(2.0 * (It - xi.integral(s))); }, 0.0, t,
      kQuadTol);
  return integ + ratio * std::exp(2.0 * It);
}

// L1 norm of the envelope propagator: the larger of the two sweep
// orientations, each maximized over its free endpoint.
double envelope_L1(const XiCurve& xi, double t) {
  auto row = [&](double t1) {
    if (t1 <= 0.0) return 0.0;
    const double It1 = xi.integral(t1);
    return quad_integrate_scalar(
        [&](double s) { return std::exp(It1 - xi.integral(s)); }, 0.0, t1,
        kQuadTol);
  };
  auto col = [&](double t0) {
    if (t0 >= t) return 0.0;
    const double It0 = xi.integral(t0);
    return quad_integrate_scalar(
        [&](double s) { return std::exp(xi.integral(s) - It0); }, t0, t,
        kQuadTol);
  };
  return std::max(scan_max(row, 0.0, t), scan_max(col, 0.0, t));
}

const char* route_name(EntryRoute route) {
  return route == EntryRoute::linear_systems ? "linear_systems" : "lchs";
}

void append_g(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  out += buf;
}

}  // namespace

CostReport evaluate_costs(const MatrixODEProblem& p, EntryRoute route,
                          CostRegime regime) {
  check_usable(p.t, p.eps, p.a, p.b, p.c, p.d);
  Inputs in;
  in.t = p.t;
  in.eps = p.eps;
  in.a = p.a;
  in.b = p.b;
  in.c = p.c;
  in.d = p.d;
  in.f = compute_L_functionals(p, 1, 0, kQuadTol);
  return assemble(in, route, regime);
}

CostReport evaluate_costs(const TimeDepProblem& p, EntryRoute route) {
  check_usable(p.t, p.eps, p.a, p.b, p.c, p.d);
  if (p.gridJ < 1 || static_cast<int>(p.xiAfun.size()) != p.gridJ ||
      static_cast<int>(p.xiBfun.size()) != p.gridJ)
    throw PreconditionError(
        "evaluate_costs: xiAfun and xiBfun must hold gridJ samples");
  if (p.derivA < 0.0 || p.derivB < 0.0 || p.derivC < 0.0)
    throw PreconditionError(
        "evaluate_costs: derivative bounds must be nonnegative");

  const XiCurve xa(p.xiAfun, p.t), xb(p.xiBfun, p.t);
  const double ratio = p.d / p.c;

  Inputs in;
  in.t = p.t;
  in.eps = p.eps;
  in.a = p.a;
  in.b = p.b;
  in.c = p.c;
  in.d = p.d;
  in.derivA = p.derivA;
  in.derivB = p.derivB;
  in.derivC = p.derivC;

  const double sideA = envelope_side(xa, p.t, ratio);
  const double sideB = envelope_side(xb, p.t, ratio);
  const double maxExpA = envelope_max_exp(xa);
  const double maxExpB = envelope_max_exp(xb);
  in.f.Lcal = std::max(sideA, sideB);
  in.f.L2 = std::sqrt(sideA * sideB);
  // Under the envelope the state-resolved factors coincide with the
  // xi-integrated ones.
  in.f.Ltilde2 = in.f.L2;
  in.f.Ltilde1 = std::max(envelope_L1(xa, p.t) + ratio * maxExpA,
                          envelope_L1(xb, p.t) + ratio * maxExpB);
  in.f.maxExp = std::max(maxExpA, maxExpB);

  return assemble(in, route, CostRegime::time_dependent);
}

std::vector<std::vector<GapCheck>> verify_lower_bound_gap(
    const std::vector<double>& tGrid, const std::vector<double>& deltaGrid) {
  constexpr double kDeltaMax = 0.19634954084936207;  // pi / 16
  for (double delta : deltaGrid)
    if (!(delta > 0.0) || delta > kDeltaMax * (1.0 + 1e-12))
      throw PreconditionError(
          "verify_lower_bound_gap: delta must lie in (0, pi/16]");
  for (double t : tGrid)
    if (!(t >= 6.0))
      throw PreconditionError("verify_lower_bound_gap: t must be at least 6");

  std::vector<std::vector<GapCheck>> table;
  table.reserve(tGrid.size());
  for (double t : tGrid) {
    std::vector<GapCheck> row;
    row.reserve(deltaGrid.size());
    for (double delta : deltaGrid) {
      const double sd = std::sin(delta);
      const double s2 = std::sin(2.0 * delta);
      const double Ld = -std::expm1(-t * sd) / sd;
      const double L2d = -std::expm1(-t * s2) / s2;
      const double epsd = 0.03 * Ld * Ld * sd;
      GapCheck cell;
      cell.gap = (Ld - L2d >= 2.0 * epsd);
      cell.feasible = (epsd <= t / 100.0);
      row.push_back(cell);
    }
    table.push_back(std::move(row));
  }
  return table;
}

std::string cost_report_json(const CostReport& r) {
  nlohmann::json j;
  j["route"] = route_name(r.route);
  j["regime"] =
      r.regime == CostRegime::time_independent ? "static" : "timedep";
  j["mu"] = r.mu;
  j["queries"]["# queries to U_phi and U_psi"] = r.queries_state_prep;
  j["queries"]["# queries to U_A and U_B"] = r.queries_AB;
  j["queries"]["# queries to U_C and U_D"] = r.queries_CD;
  j["queries"]["# additional primitive gates"] = r.gates_extra;
  j["headline_queries"] = r.headline_queries;
  j["functionals"]["Lcal"] = r.functionals.Lcal;
  j["functionals"]["L2"] = r.functionals.L2;
  j["functionals"]["Ltilde1"] = r.functionals.Ltilde1;
  j["functionals"]["Ltilde2"] = r.functionals.Ltilde2;
  j["functionals"]["maxExp"] = r.functionals.maxExp;
  j["lower_bound"] = r.lower_bound;
  j["ratio_upper_to_lower"] = r.ratio_upper_to_lower;
  return j.dump();
}

std::string cost_table_csv(const std::vector<CostReport>& reports) {
  if (reports.empty())
    throw PreconditionError("cost_table_csv: needs at least one report");
  const CostRegime regime = reports.front().regime;
  for (const CostReport& r : reports)
    if (r.regime != regime)
      throw PreconditionError("cost_table_csv: reports must share a regime");

  std::string out = "row";
  for (const CostReport& r : reports) {
    out += ',';
    out += route_name(r.route);
  }
  out += '\n';

  struct Row {
    const char* label;
    double CostReport::* field;
  };
  std::vector<Row> rows = {
      {"# queries to U_phi and U_psi", &CostReport::queries_state_prep},
      {"# queries to U_A and U_B", &CostReport::queries_AB},
      {"# queries to U_C and U_D", &CostReport::queries_CD},
  };
  if (regime == CostRegime::time_independent)
    rows.push_back({"# additional primitive gates", &CostReport::gates_extra});

  for (const Row& row : rows) {
    out += row.label;
    for (const CostReport& r : reports) {
      out += ',';
      append_g(out, r.*(row.field));
    }
    out += '\n';
  }
  return out;
}

}  // namespace sylverse
