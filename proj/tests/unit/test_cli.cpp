#include <sys/wait.h>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sylverse/matcore.hpp"
#include "sylverse/problem.hpp"

#ifndef SYLVERSE_CLI_PATH
#error "SYLVERSE_CLI_PATH must name the sylverse binary"
#endif

using namespace sylverse;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string work(const std::string& name) {
  static const std::filesystem::path dir = [] {
    std::filesystem::path d = std::filesystem::temp_directory_path() / "sylverse_cli_test";
    std::filesystem::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

// Runs the installed binary with stdout captured to `cap` (stderr to
// cap + ".err") and returns the exit status.
int run_cli(const std::string& args, const std::string& cap) {
  std::string cmd = std::string(SYLVERSE_CLI_PATH) + " " + args + " > " + cap +
                    " 2> " + cap + ".err";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

json load_json(const std::string& path) { return json::parse(slurp(path)); }

Complex as_complex(const json& pair) {
  REQUIRE(pair.is_array());
  REQUIRE(pair.size() == 2);
  return Complex(pair[0].get<double>(), pair[1].get<double>());
}

// Generator-free instance: A = B = 0, so X(t) = t C + D exactly and the
// target entry is t <phi|C|psi> + <phi|D|psi>.
MatrixODEProblem trivial_problem() {
  MatrixODEProblem p;
  p.n = 3;
  p.A = CMatrix::Zero(3, 3);
  p.B = CMatrix::Zero(3, 3);
  p.C = CMatrix::Zero(3, 3);
  p.C(0, 1) = Complex(0.30, -0.20);
  p.C(1, 0) = Complex(0.10, 0.05);
  p.C(2, 2) = Complex(0.25, 0.0);
  p.D = CMatrix::Zero(3, 3);
  p.D(0, 1) = Complex(-0.15, 0.40);
  p.D(1, 2) = Complex(0.05, 0.0);
  p.t = 1.5;
  p.eps = 1e-8;
  p.phi = CVector::Zero(3);
  p.psi = CVector::Zero(3);
  p.phi(0) = 1.0;
  p.psi(1) = 1.0;
  p.a = p.b = 1.0;
  p.c = 1.0;
  p.d = 1.0;
  p.xiA = p.xiB = 0.0;
  p.validate();
  return p;
}

Complex trivial_entry(const MatrixODEProblem& p) {
  return p.t * p.C(0, 1) + p.D(0, 1);
}

TimeDepProblem trivial_timedep(int J) {
  MatrixODEProblem sp = trivial_problem();
  TimeDepProblem p;
  p.n = sp.n;
  p.gridJ = J;
  p.t = sp.t;
  // The Dyson pipeline sizes its Riemann grids from eps; the static 1e-8
  // would demand an impractical count, and the A = B = 0 estimate is exact
  // anyway.
  p.eps = 1e-3;
  for (int j = 0; j < J; ++j) {
    p.Aseq.push_back(sp.A);
    p.Bseq.push_back(sp.B);
    p.Cseq.push_back(sp.C);
  }
  p.D = sp.D;
  p.phi = sp.phi;
  p.psi = sp.psi;
  p.a = sp.a;
  p.b = sp.b;
  p.c = sp.c;
  p.d = sp.d;
  p.xiAfun.assign(J, 0.0);
  p.xiBfun.assign(J, 0.0);
  p.derivA = p.derivB = p.derivC = 0.0;
  p.validate();
  return p;
}

const std::string& lb_file() {
  static const std::string path = [] {
    std::string f = work("lb.json");
    save_problem(make_lower_bound_instance(3, kPi / 16.0, 6.0), f);
    return f;
  }();
  return path;
}

const std::string& trivial_file() {
  static const std::string path = [] {
    std::string f = work("trivial.json");
    save_problem(trivial_problem(), f);
    return f;
  }();
  return path;
}

const std::string& timedep_file() {
  static const std::string path = [] {
    std::string f = work("timedep.json");
    save_problem(trivial_timedep(4), f);
    return f;
  }();
  return path;
}

}  // namespace

TEST_CASE("solve reproduces the hard-instance closed form at defaults") {
  // Frozen value of (1 - e^{-t sin theta}) / sin theta at t = 6,
  // theta = pi/16; see the lower-bound construction.
  const double expect = 3.5358043589526358;
  std::string out = work("solve_lb.json");
  int rc = run_cli("solve --problem " + lb_file() + " --tol 1e-8 --out " + out,
                   work("solve_lb.cap"));
  CHECK(rc == 0);
  json j = load_json(out);
  CHECK(j["command"] == "solve");
  CHECK(j["kind"] == "static");
  CHECK(j["route"] == "linear_systems");
  CHECK(j["M"].get<int>() == 6);
  CHECK(j["R"].get<int>() == 1);
  CHECK(j["K"].get<int>() >= 8);
  CHECK(j["pass"].get<bool>());
  Complex oracle = as_complex(j["oracle"]["entry"]);
  Complex est = as_complex(j["estimate"]);
  CHECK(std::abs(oracle - Complex(expect, 0.0)) <= 1e-8);
  CHECK(std::abs(est - oracle) <= 1e-8);
  CHECK(j["difference"].get<double>() == doctest::Approx(std::abs(est - oracle)).epsilon(1e-12));
  CHECK(j["budget"].contains("hist"));
  CHECK(j["budget"].contains("overlap"));
  CHECK(j["budget"].contains("truncation"));
}

TEST_CASE("solve handles a generator-free instance on both routes") {
  Complex expect = trivial_entry(trivial_problem());
  for (const std::string route : {"ls", "lchs"}) {
    std::string out = work("solve_triv_" + route + ".json");
    int rc = run_cli("solve --problem " + trivial_file() + " --route " + route +
                         " --tol 1e-8 --out " + out,
                     work("solve_triv.cap"));
    CHECK(rc == 0);
    json j = load_json(out);
    CHECK(j["pass"].get<bool>());
    CHECK(std::abs(as_complex(j["estimate"]) - expect) <= 1e-7);
    CHECK(std::abs(as_complex(j["oracle"]["entry"]) - expect) <= 1e-8);
  }
}

TEST_CASE("solve dispatches time-dependent instances to the Dyson pipeline") {
  Complex expect = trivial_entry(trivial_problem());
  std::string out = work("solve_td.json");
  int rc = run_cli("solve --problem " + timedep_file() + " --tol 1e-6 --out " + out,
                   work("solve_td.cap"));
  CHECK(rc == 0);
  json j = load_json(out);
  CHECK(j["kind"] == "timedep");
  CHECK(j["route"] == "linear_systems");
  CHECK(j["pass"].get<bool>());
  CHECK(std::abs(as_complex(j["estimate"]) - expect) <= 1e-6);

  // The LCHS route has no time-dependent counterpart here.
  rc = run_cli("solve --problem " + timedep_file() + " --route lchs --out " +
                   work("solve_td_bad.json"),
               work("solve_td_bad.cap"));
  CHECK(rc == 2);
}

TEST_CASE("validation failures exit 2") {
  CHECK(run_cli("solve --problem " + work("absent.json"), work("v1.cap")) == 2);

  std::ofstream bad(work("broken.json"));
  bad << "{ this is not json";
  bad.close();
  CHECK(run_cli("solve --problem " + work("broken.json"), work("v2.cap")) == 2);

  CHECK(run_cli("solve --problem " + trivial_file() + " --route quantum",
                work("v3.cap")) == 2);

  // M = 2 puts h = 3 above the 1/a step bound.
  CHECK(run_cli("solve --problem " + lb_file() + " --M 2", work("v4.cap")) == 2);
}

TEST_CASE("a starved grid trips the accuracy gate") {
  std::string out = work("solve_starved.json");
  int rc = run_cli("solve --problem " + lb_file() +
                       " --M 8 --K 2 --tol 1e-10 --out " + out,
                   work("starved.cap"));
  CHECK(rc == 3);
  json j = load_json(out);
  CHECK_FALSE(j["pass"].get<bool>());
  CHECK(j["difference"].get<double>() > 1e-10);
}

TEST_CASE("repeated invocations are byte-identical") {
  std::string a = work("det_a.json"), b = work("det_b.json");
  std::string args = "solve --problem " + lb_file() + " --tol 1e-8 --out ";
  CHECK(run_cli(args + a, work("det.cap")) == 0);
  CHECK(run_cli(args + b, work("det.cap")) == 0);
  CHECK(slurp(a) == slurp(b));

  std::string ca = work("det_ca.csv"), cb = work("det_cb.csv");
  std::string cargs = "cost --problem " + lb_file() + " --format csv --out ";
  CHECK(run_cli(cargs + ca, work("det.cap")) == 0);
  CHECK(run_cli(cargs + cb, work("det.cap")) == 0);
  CHECK(slurp(ca) == slurp(cb));
}

TEST_CASE("certify emits passing certificates for both sides") {
  std::string out = work("cert.json");
  int rc = run_cli("certify --problem " + lb_file() + " --out " + out,
                   work("cert.cap"));
  CHECK(rc == 0);
  json j = load_json(out);
  CHECK(j["command"] == "certify");
  CHECK(j["pass"].get<bool>());
  for (const char* side : {"A", "B"}) {
    CHECK(j[side]["pass"].get<bool>());
    CHECK(j[side]["kappa"].get<double>() >= 1.0);
    CHECK(j[side]["normA"].get<double>() <= 3.7182818284590452 + 1e-9);
  }

  std::string tout = work("cert_td.json");
  rc = run_cli("certify --problem " + timedep_file() + " --out " + tout,
               work("cert_td.cap"));
  CHECK(rc == 0);
  json tj = load_json(tout);
  CHECK(tj["A"]["pass"].get<bool>());
  CHECK(tj["pass"].get<bool>());
}

TEST_CASE("cost reports both routes and the regime-specific table") {
  std::string out = work("cost_both.json");
  CHECK(run_cli("cost --problem " + lb_file() + " --out " + out,
                work("cost.cap")) == 0);
  json j = load_json(out);
  CHECK(j["command"] == "cost");
  CHECK(j.contains("linear_systems"));
  CHECK(j.contains("lchs"));
  CHECK(j["linear_systems"]["regime"] == "static");
  CHECK(j["lchs"]["route"] == "lchs");
  CHECK(j["lchs"]["queries"]["# queries to U_phi and U_psi"].get<double>() > 0.0);

  std::string single = work("cost_ls.json");
  CHECK(run_cli("cost --problem " + lb_file() + " --route ls --out " + single,
                work("cost.cap")) == 0);
  json s = load_json(single);
  CHECK(s["route"] == "linear_systems");
  CHECK(s["regime"] == "static");

  std::string csv = work("cost.csv");
  CHECK(run_cli("cost --problem " + lb_file() + " --format csv --out " + csv,
                work("cost.cap")) == 0);
  auto lines = split_lines(slurp(csv));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "row,linear_systems,lchs");
  std::string all = slurp(csv);
  CHECK(all.find("# queries to U_phi and U_psi") != std::string::npos);
  CHECK(all.find("# queries to U_A and U_B") != std::string::npos);
  CHECK(all.find("# queries to U_C and U_D") != std::string::npos);
  CHECK(all.find("# additional primitive gates") != std::string::npos);

  // Time-dependent tables drop the gate row.
  std::string tcsv = work("cost_td.csv");
  CHECK(run_cli("cost --problem " + timedep_file() + " --format csv --out " + tcsv,
                work("cost.cap")) == 0);
  auto tlines = split_lines(slurp(tcsv));
  REQUIRE(tlines.size() == 4);
  CHECK(slurp(tcsv).find("# additional primitive gates") == std::string::npos);
}

TEST_CASE("fermion trajectory relaxes toward the fixed point") {
  std::string csv = work("fermion.csv");
  std::string args = "fermion --n 3 --seed 7 --tol 1e-6 --format csv --out ";
  CHECK(run_cli(args + csv, work("fermion.cap")) == 0);
  auto lines = split_lines(slurp(csv));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "t,entry_re,entry_im,dist_to_fixed_point,min_eig,max_eig");
  std::vector<double> dist, minEig, maxEig;
  for (int i = 1; i < 4; ++i) {
    std::istringstream row(lines[i]);
    std::string field;
    std::vector<double> vals;
    while (std::getline(row, field, ',')) vals.push_back(std::strtod(field.c_str(), nullptr));
    REQUIRE(vals.size() == 6);
    dist.push_back(vals[3]);
    minEig.push_back(vals[4]);
    maxEig.push_back(vals[5]);
  }
  // gamma = 1/2 and t = {2, 8, 16}: contraction by e^{-2 gamma dt} between
  // consecutive samples leaves generous slack at factor 0.1.
  CHECK(dist[1] <= 0.1 * dist[0]);
  CHECK(dist[2] <= dist[1] + 1e-12);
  for (int i = 0; i < 3; ++i) {
    CHECK(minEig[i] >= -1e-6);
    CHECK(maxEig[i] <= 1.0 + 1e-6);
  }

  std::string csv2 = work("fermion2.csv");
  CHECK(run_cli(args + csv2, work("fermion.cap")) == 0);
  CHECK(slurp(csv) == slurp(csv2));
  std::string other = work("fermion_seed8.csv");
  CHECK(run_cli("fermion --n 3 --seed 8 --tol 1e-6 --format csv --out " + other,
                work("fermion.cap")) == 0);
  CHECK(slurp(other) != slurp(csv));

  std::string jout = work("fermion.json");
  CHECK(run_cli("fermion --n 3 --seed 7 --tol 1e-6 --out " + jout,
                work("fermion.cap")) == 0);
  json j = load_json(jout);
  CHECK(j["command"] == "fermion");
  CHECK(j["gamma"].get<double>() == 0.5);
  CHECK(j["samples"].size() == 3);
  CHECK(j["difference"].get<double>() <= 1e-6);
  CHECK(j["pass"].get<bool>());
}

TEST_CASE("bench reports deterministic operation counters") {
  std::string csv = work("bench.csv");
  std::string args =
      "bench --lattice 1d --n 128 --m 24 --restart-r 0.5 --out ";
  CHECK(run_cli(args + csv, work("bench.cap")) == 0);
  auto lines = split_lines(slurp(csv));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] ==
        "method,n,dims,m,matvecs,inner_products,expms,mem_highwater,entry_re,entry_im");
  auto fields = [](const std::string& line) {
    std::vector<std::string> out;
    std::istringstream row(line);
    std::string f;
    while (std::getline(row, f, ',')) out.push_back(f);
    return out;
  };
  auto kr = fields(lines[1]);
  REQUIRE(kr.size() == 10);
  CHECK(kr[0] == "krylov_entry");
  CHECK(kr[1] == "128");
  CHECK(kr[2] == "1");
  CHECK(kr[3] == "24");
  CHECK(std::stoll(kr[4]) == 6 * 24 - 2);
  CHECK(std::stoll(kr[5]) == 6 * 24 * 24);
  auto rs = fields(lines[2]);
  REQUIRE(rs.size() == 10);
  CHECK(rs[0] == "restarted_entry");
  CHECK(std::stoll(rs[7]) <= 3LL * 24 * 128);

  std::string csv2 = work("bench2.csv");
  CHECK(run_cli(args + csv2, work("bench.cap")) == 0);
  CHECK(slurp(csv) == slurp(csv2));

  // 2d: --n is the side, so 5 -> 25 sites.
  std::string csv3 = work("bench_2d.csv");
  CHECK(run_cli("bench --lattice 2d --n 5 --m 8 --out " + csv3,
                work("bench.cap")) == 0);
  auto l3 = split_lines(slurp(csv3));
  REQUIRE(l3.size() == 2);
  CHECK(fields(l3[1])[1] == "25");

  CHECK(run_cli("bench --lattice 4d --n 4 --m 4", work("bench.cap")) == 2);
}

TEST_CASE("lowerbound certifies the gap on the default grid") {
  std::string out = work("lower.json");
  CHECK(run_cli("lowerbound --out " + out, work("lower.cap")) == 0);
  json j = load_json(out);
  CHECK(j["command"] == "lowerbound");
  CHECK(j["pass"].get<bool>());
  REQUIRE(j["cells"].size() == 9);
  int seen = 0;
  for (const auto& cell : j["cells"]) {
    double t = cell["t"].get<double>();
    double d = cell["delta"].get<double>();
    CHECK(cell["gap"].get<bool>());
    double closed = -std::expm1(-t * std::sin(d)) / std::sin(d);
    CHECK(cell["L_delta"].get<double>() == doctest::Approx(closed).epsilon(1e-12));
    if (t == 6.0 && std::abs(d - kPi / 16.0) < 1e-15) {
      CHECK_FALSE(cell["feasible"].get<bool>());
      ++seen;
    }
    if (t == 24.0 && std::abs(d - kPi / 16.0) < 1e-15) {
      CHECK(cell["feasible"].get<bool>());
      ++seen;
    }
  }
  CHECK(seen == 2);

  std::string csv = work("lower.csv");
  CHECK(run_cli("lowerbound --format csv --out " + csv, work("lower.cap")) == 0);
  auto lines = split_lines(slurp(csv));
  REQUIRE(lines.size() == 10);
  CHECK(lines[0] == "t,delta,L_delta,L_2delta,eps_delta,gap,feasible");
}

TEST_CASE("--out - streams the report to stdout") {
  std::string cap = work("stdout.cap");
  CHECK(run_cli("cost --problem " + lb_file() + " --route ls --out -", cap) == 0);
  json j = json::parse(slurp(cap));
  CHECK(j["route"] == "linear_systems");
}
