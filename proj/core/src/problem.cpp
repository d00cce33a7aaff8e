#include "sylverse/problem.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "json.hpp"
#include "sylverse/errors.hpp"

namespace sylverse {

namespace {

using nlohmann::json;

// Measurement slack: spectral_norm and log_norm are documented to 1e-10
// accuracy, so stored bounds get one order of magnitude of headroom.
constexpr double kBoundSlack = 1e-9;

void check_square(const CMatrix& M, int n, const char* field) {
  if (M.rows() != n || M.cols() != n)
    throw ValidationError(std::string("problem: ") + field + " must be " +
                              std::to_string(n) + "x" + std::to_string(n),
                          field);
}

void check_unit(const CVector& v, int n, const char* field) {
  if (v.size() != n)
    throw ValidationError(std::string("problem: ") + field + " must have length " +
                              std::to_string(n),
                          field);
  if (std::abs(v.norm() - 1.0) > 1e-12)
    throw ValidationError(std::string("problem: ") + field + " must be a unit vector",
                          field);
}

void check_positive(double x, const char* field) {
  if (!(x > 0.0))
    throw ValidationError(std::string("problem: ") + field + " must be positive",
                          field);
}

void check_norm_bound(const CMatrix& M, double bound, const char* field) {
  if (spectral_norm(M) > bound + kBoundSlack * std::max(1.0, bound))
    throw ValidationError(std::string("problem: spectral norm exceeds bound ") + field,
                          field);
}

double round_up_3sig(double x) {
  if (x <= 0.0) return 0.0;
  double k = std::floor(std::log10(x));
  double scale = std::pow(10.0, k - 2.0);
  double v = std::ceil(x / scale) * scale;
  while (v < x) v = std::nextafter(v, std::numeric_limits<double>::infinity());
  return v;
}

}  // namespace

void MatrixODEProblem::validate() const {
  if (n < 1) throw ValidationError("problem: n must be at least 1", "n");
  check_square(A, n, "A");
  check_square(B, n, "B");
  check_square(C, n, "C");
  check_square(D, n, "D");
  if (!(t >= 0.0)) throw ValidationError("problem: t must be nonnegative", "t");
  if (!(eps > 0.0)) throw ValidationError("problem: eps must be positive", "eps");
  check_unit(phi, n, "phi");
  check_unit(psi, n, "psi");
  check_positive(a, "a");
  check_positive(b, "b");
  check_positive(c, "c");
  check_positive(d, "d");
  check_norm_bound(A, a, "a");
  check_norm_bound(B, b, "b");
  check_norm_bound(C, c, "c");
  check_norm_bound(D, d, "d");
  if (log_norm(A) > xiA + kBoundSlack)
    throw ValidationError("problem: log norm of A exceeds xiA", "xiA");
  if (log_norm(B) > xiB + kBoundSlack)
    throw ValidationError("problem: log norm of B exceeds xiB", "xiB");
}

void TimeDepProblem::validate() const {
  if (n < 1) throw ValidationError("problem: n must be at least 1", "n");
  if (gridJ < 2) throw ValidationError("problem: gridJ must be at least 2", "gridJ");
  if (!(t >= 0.0)) throw ValidationError("problem: t must be nonnegative", "t");
  if (!(eps > 0.0)) throw ValidationError("problem: eps must be positive", "eps");
  auto check_seq = [&](const std::vector<CMatrix>& seq, double bound,
                       const char* field) {
    if (static_cast<int>(seq.size()) != gridJ)
      throw ValidationError(std::string("problem: ") + field + " must hold gridJ samples",
                            field);
    for (const CMatrix& M : seq) {
      check_square(M, n, field);
      check_norm_bound(M, bound, field);
    }
  };
  check_positive(a, "a");
  check_positive(b, "b");
  check_positive(c, "c");
  check_positive(d, "d");
  check_seq(Aseq, a, "Aseq");
  check_seq(Bseq, b, "Bseq");
  check_seq(Cseq, c, "Cseq");
  check_square(D, n, "D");
  check_norm_bound(D, d, "D");
  check_unit(phi, n, "phi");
  check_unit(psi, n, "psi");
  if (static_cast<int>(xiAfun.size()) != gridJ)
    throw ValidationError("problem: xiAfun must hold gridJ samples", "xiAfun");
  if (static_cast<int>(xiBfun.size()) != gridJ)
    throw ValidationError("problem: xiBfun must hold gridJ samples", "xiBfun");
  for (int j = 0; j < gridJ; ++j) {
    if (log_norm(Aseq[j]) > xiAfun[j] + kBoundSlack)
      throw ValidationError("problem: log norm of Aseq sample exceeds xiAfun", "xiAfun");
    if (log_norm(Bseq[j]) > xiBfun[j] + kBoundSlack)
      throw ValidationError("problem: log norm of Bseq sample exceeds xiBfun", "xiBfun");
  }
  if (derivA < 0.0 || derivB < 0.0 || derivC < 0.0)
    throw ValidationError("problem: derivative bounds must be nonnegative", "derivs");
}

namespace {

CMatrix interp(const std::vector<CMatrix>& seq, double s, double t, int J) {
  double dt = t / J;
  double u = (dt > 0.0) ? s / dt : 0.0;
  if (u <= 0.0) return seq.front();
  if (u >= static_cast<double>(J - 1)) return seq.back();
  int j = static_cast<int>(std::floor(u));
  double w = u - j;
  return (1.0 - w) * seq[j] + w * seq[j + 1];
}

}  // namespace

CMatrix TimeDepProblem::A_at(double s) const { return interp(Aseq, s, t, gridJ); }
CMatrix TimeDepProblem::B_at(double s) const { return interp(Bseq, s, t, gridJ); }
CMatrix TimeDepProblem::C_at(double s) const { return interp(Cseq, s, t, gridJ); }

MatrixODEProblem make_lower_bound_instance(int n, double theta, double t) {
  if (n < 1)
    throw PreconditionError("make_lower_bound_instance: n must be at least 1");
  constexpr double kHalfPi = 1.57079632679489661923;
  if (!(theta > 0.0) || theta > kHalfPi)
    throw PreconditionError("make_lower_bound_instance: theta must lie in (0, pi/2]");
  if (!(t > 0.0))
    throw PreconditionError("make_lower_bound_instance: t must be positive");

  MatrixODEProblem p;
  p.n = n;
  p.A = CMatrix::Zero(n, n);
  p.A(0, 0) = -std::sin(theta);
  for (int j = 1; j < n; ++j) p.A(j, j) = -1.0;
  p.B = CMatrix::Zero(n, n);
  p.C = CMatrix::Identity(n, n);
  p.D = CMatrix::Zero(n, n);
  p.t = t;
  p.phi = CVector::Zero(n);
  p.phi(0) = 1.0;
  p.psi = p.phi;
  p.eps = 1e-9;
  p.a = 1.0;
  p.b = 1.0;
  p.c = 1.0;
  p.d = 1.0;
  p.xiA = -std::sin(theta);
  p.xiB = 0.0;
  p.validate();
  return p;
}

namespace {

// All randomness flows through raw mt19937_64 output so instances are
// identical across standard libraries.
double draw_unit(std::mt19937_64& gen) {
  return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
}

CMatrix draw_matrix(std::mt19937_64& gen, int n) {
  CMatrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double re = draw_unit(gen);
      double im = draw_unit(gen);
      M(i, j) = Complex(re, im);
    }
  return M / std::sqrt(static_cast<double>(n));
}

CVector draw_state(std::mt19937_64& gen, int n) {
  CVector v(n);
  for (int i = 0; i < n; ++i) {
    double re = draw_unit(gen);
    double im = draw_unit(gen);
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

// Shifts G into the requested log-norm regime and reports the bound.
CMatrix shape_sign(const CMatrix& G, LogNormSign sign, double* xi) {
  switch (sign) {
    case LogNormSign::zero:
      *xi = 0.0;
      return 0.5 * (G - G.adjoint());
    case LogNormSign::negative: {
      *xi = -0.1;
      double mu = log_norm(G);
      return G - (mu + 0.1) * CMatrix::Identity(G.rows(), G.cols());
    }
    case LogNormSign::positive: {
      *xi = 0.25;
      double mu = log_norm(G);
      return G + (0.25 - mu) * CMatrix::Identity(G.rows(), G.cols());
    }
  }
  throw PreconditionError("make_random_instance: unknown sign");
}

}  // namespace

MatrixODEProblem make_random_instance(int n, std::uint64_t seed, LogNormSign sign,
                                      double t) {
  if (n < 1 || n > 256)
    throw PreconditionError("make_random_instance: n must lie in [1, 256]");
  if (!(t > 0.0))
    throw PreconditionError("make_random_instance: t must be positive");

  std::mt19937_64 gen(seed);
  MatrixODEProblem p;
  p.n = n;
  p.A = shape_sign(draw_matrix(gen, n), sign, &p.xiA);
  p.B = shape_sign(draw_matrix(gen, n), sign, &p.xiB);
  p.C = draw_matrix(gen, n);
  p.D = draw_matrix(gen, n);
  p.phi = draw_state(gen, n);
  p.psi = draw_state(gen, n);
  p.t = t;
  p.eps = 1e-6;
  p.a = round_up_3sig(spectral_norm(p.A));
  p.b = round_up_3sig(spectral_norm(p.B));
  p.c = round_up_3sig(spectral_norm(p.C));
  p.d = round_up_3sig(spectral_norm(p.D));
  p.validate();
  return p;
}

namespace {

json mat_to_json(const CMatrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      row.push_back(json::array({M(i, j).real(), M(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vec_to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(json::array({v(i).real(), v(i).imag()}));
  return out;
}

double num_field(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number())
    throw ValidationError(std::string("problem: missing or non-numeric field ") + field,
                          field);
  return j[field].get<double>();
}

Complex parse_complex(const json& e, const char* field) {
  if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
    throw ValidationError(std::string("problem: entries of ") + field +
                              " must be [re, im] pairs",
                          field);
  return Complex(e[0].get<double>(), e[1].get<double>());
}

CMatrix parse_matrix(const json& j, int n, const char* field) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ValidationError(std::string("problem: ") + field + " must have " +
                              std::to_string(n) + " rows",
                          field);
  CMatrix M(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ValidationError(std::string("problem: row of ") + field + " must have " +
                                std::to_string(n) + " entries",
                            field);
    for (int k = 0; k < n; ++k) M(i, k) = parse_complex(row[k], field);
  }
  return M;
}

CVector parse_vector(const json& j, int n, const char* field) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ValidationError(std::string("problem: ") + field + " must have " +
                              std::to_string(n) + " entries",
                          field);
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = parse_complex(j[i], field);
  return v;
}

const json& sub_object(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_object())
    throw ValidationError(std::string("problem: missing object field ") + field, field);
  return j[field];
}

const json& sub_array(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array())
    throw ValidationError(std::string("problem: missing array field ") + field, field);
  return j[field];
}

void write_document(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("problem: cannot open file for writing", "path");
  out << j.dump(1) << '\n';
  if (!out) throw ValidationError("problem: write failed", "path");
}

}  // namespace

void save_problem(const MatrixODEProblem& p, const std::string& path) {
  json j;
  j["kind"] = "static";
  j["n"] = p.n;
  j["t"] = p.t;
  j["eps"] = p.eps;
  j["A"] = mat_to_json(p.A);
  j["B"] = mat_to_json(p.B);
  j["C"] = mat_to_json(p.C);
  j["D"] = mat_to_json(p.D);
  j["phi"] = vec_to_json(p.phi);
  j["psi"] = vec_to_json(p.psi);
  j["bounds"] = {{"a", p.a},     {"b", p.b},     {"c", p.c},
                 {"d", p.d},     {"xiA", p.xiA}, {"xiB", p.xiB}};
  write_document(j, path);
}

void save_problem(const TimeDepProblem& p, const std::string& path) {
  json j;
  j["kind"] = "timedep";
  j["n"] = p.n;
  j["gridJ"] = p.gridJ;
  j["t"] = p.t;
  j["eps"] = p.eps;
  json aseq = json::array(), bseq = json::array(), cseq = json::array();
  for (const CMatrix& M : p.Aseq) aseq.push_back(mat_to_json(M));
  for (const CMatrix& M : p.Bseq) bseq.push_back(mat_to_json(M));
  for (const CMatrix& M : p.Cseq) cseq.push_back(mat_to_json(M));
  j["Aseq"] = std::move(aseq);
  j["Bseq"] = std::move(bseq);
  j["Cseq"] = std::move(cseq);
  j["D"] = mat_to_json(p.D);
  j["phi"] = vec_to_json(p.phi);
  j["psi"] = vec_to_json(p.psi);
  j["bounds"] = {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}};
  j["xiAfun"] = p.xiAfun;
  j["xiBfun"] = p.xiBfun;
  j["derivs"] = {{"A", p.derivA}, {"B", p.derivB}, {"C", p.derivC}};
  write_document(j, path);
}

AnyProblem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("problem: cannot open " + path, "path");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("problem: malformed JSON: ") + e.what(), "json");
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ValidationError("problem: missing kind", "kind");
  std::string kind = j["kind"].get<std::string>();

  if (kind == "static") {
    MatrixODEProblem p;
    if (!j.contains("n") || !j["n"].is_number_integer())
      throw ValidationError("problem: missing integer n", "n");
    p.n = j["n"].get<int>();
    if (p.n < 1) throw ValidationError("problem: n must be at least 1", "n");
    p.t = num_field(j, "t");
    p.eps = num_field(j, "eps");
    p.A = parse_matrix(sub_array(j, "A"), p.n, "A");
    p.B = parse_matrix(sub_array(j, "B"), p.n, "B");
    p.C = parse_matrix(sub_array(j, "C"), p.n, "C");
    p.D = parse_matrix(sub_array(j, "D"), p.n, "D");
    p.phi = parse_vector(sub_array(j, "phi"), p.n, "phi");
    p.psi = parse_vector(sub_array(j, "psi"), p.n, "psi");
    const json& b = sub_object(j, "bounds");
    p.a = num_field(b, "a");
    p.b = num_field(b, "b");
    p.c = num_field(b, "c");
    p.d = num_field(b, "d");
    p.xiA = num_field(b, "xiA");
    p.xiB = num_field(b, "xiB");
    p.validate();
    return p;
  }

  if (kind == "timedep") {
    TimeDepProblem p;
    if (!j.contains("n") || !j["n"].is_number_integer())
      throw ValidationError("problem: missing integer n", "n");
    p.n = j["n"].get<int>();
    if (p.n < 1) throw ValidationError("problem: n must be at least 1", "n");
    if (!j.contains("gridJ") || !j["gridJ"].is_number_integer())
      throw ValidationError("problem: missing integer gridJ", "gridJ");
    p.gridJ = j["gridJ"].get<int>();
    p.t = num_field(j, "t");
    p.eps = num_field(j, "eps");
    auto parse_seq = [&](const char* field) {
      const json& arr = sub_array(j, field);
      std::vector<CMatrix> seq;
      for (const json& m : arr) seq.push_back(parse_matrix(m, p.n, field));
      return seq;
    };
    p.Aseq = parse_seq("Aseq");
    p.Bseq = parse_seq("Bseq");
    p.Cseq = parse_seq("Cseq");
    p.D = parse_matrix(sub_array(j, "D"), p.n, "D");
    p.phi = parse_vector(sub_array(j, "phi"), p.n, "phi");
    p.psi = parse_vector(sub_array(j, "psi"), p.n, "psi");
    const json& b = sub_object(j, "bounds");
    p.a = num_field(b, "a");
    p.b = num_field(b, "b");
    p.c = num_field(b, "c");
    p.d = num_field(b, "d");
    auto parse_reals = [&](const char* field) {
      const json& arr = sub_array(j, field);
      std::vector<double> v;
      for (const json& e : arr) {
        if (!e.is_number())
          throw ValidationError(std::string("problem: non-numeric entry in ") + field,
                                field);
        v.push_back(e.get<double>());
      }
      return v;
    };
    p.xiAfun = parse_reals("xiAfun");
    p.xiBfun = parse_reals("xiBfun");
    const json& derivs = sub_object(j, "derivs");
    p.derivA = num_field(derivs, "A");
    p.derivB = num_field(derivs, "B");
    p.derivC = num_field(derivs, "C");
    p.validate();
    return p;
  }

  throw ValidationError("problem: unknown kind " + kind, "kind");
}

}  // namespace sylverse
