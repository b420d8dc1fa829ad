// Acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dflow/checkers.hpp"
#include "dflow/cli.hpp"
#include "dflow/error.hpp"
#include "dflow/matrix_comparison.hpp"
#include "dflow/scenario.hpp"
#include "dflow/time_series.hpp"

using namespace dflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

std::string scenario_path(const std::string& name) { return std::string(DFLOW_SCENARIO_DIR) + "/" + name + ".json"; }

struct Built {
  Scenario sc;
  FlowTrajectory tr;
  FunctionalSeries s;
};

Built build(const std::string& name) {
  Built b;
  b.sc = load_scenario(scenario_path(name));
  b.tr = build_flow(b.sc);
  b.s = assemble_series(b.tr, b.sc.series);
  return b;
}

const CheckPart* find_part(const CheckReport& r, const std::string& name) {
  for (const auto& p : r.parts)
    if (p.name == name) return &p;
  return nullptr;
}

// Finite-difference identities on the Gaussian bridge.
Outcome ac1() {
  Outcome o;
  Built b = build("bridge_gaussian");
  const auto& rec = b.s.rec;
  const double dt = b.s.dt(), sigma = b.s.sigma;
  std::vector<double> E;
  std::vector<SymMatrix> S, V, I;
  for (const auto& r : rec) {
    E.push_back(r.E);
    S.push_back(r.S);
    V.push_back(r.V);
    I.push_back(r.I);
  }
  FdSeries dE = differentiate(E, dt);
  FdMatrixSeries dS = differentiate(S, dt), dV = differentiate(V, dt), dI = differentiate(I, dt);
  double eE = 0, eS = 0, eV = 0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    eE = std::max(eE, std::fabs(dE.value[k] - rec[k].S.trace()));
    eS = std::max(eS, (dS.value[k] - rec[k].dS_rhs).max_abs());
    eV = std::max(eV, (dV.value[k] - (sigma * sigma / 4.0) * dI.value[k]).max_abs());
  }
  o.require(eE <= 1e-5, "dE vs Tr S " + num(eE));
  o.require(eS <= 1e-4, "dS vs rhs " + num(eS));
  o.require(eV <= 1e-4, "dV vs dI " + num(eV));
  o.detail += (o.detail.empty() ? "" : " | ") + std::string("dE-TrS ") + num(eE) + ", dS-rhs " + num(eS) +
              ", dV-(s^2/4)dI " + num(eV);
  return o;
}

// Synthetic dM = M^2 + P(t) integrated by RK4 together with the running integral of Tr M.
struct Synthetic {
  SymMatrix M0;
  std::vector<Vec> u;
  std::vector<double> a, w, phi;

  SymMatrix P(double t) const {
    SymMatrix p(M0.dim());
    for (std::size_t j = 0; j < u.size(); ++j)
      p += (a[j] * (1.0 + 0.5 * std::sin(w[j] * t + phi[j]))) * SymMatrix::outer(u[j]);
    return p;
  }
};

Synthetic make_synthetic(int index, bool commuting) {
  std::mt19937_64 gen(1000 + index);
  std::uniform_real_distribution<double> lam(-1.5, 0.6), amp(0.0, 0.5), freq(0.5, 6.0), ph(0.0, 6.28);
  Synthetic s;
  int n = 1 + index % 3;
  auto R = random_basis(n, 5000 + index);
  s.M0 = SymMatrix(n);
  for (int i = 0; i < n; ++i) {
    double l = lam(gen);
    s.M0 += l * SymMatrix::outer(commuting ? Vec::unit(n, i) : R[i]);
  }
  if (!commuting) {
    int terms = 1 + static_cast<int>(gen() % 3);
    for (int j = 0; j < terms; ++j) {
      s.u.push_back(random_unit(n, 7000 + index, j));
      s.a.push_back(amp(gen));
      s.w.push_back(freq(gen));
      s.phi.push_back(ph(gen));
    }
  }
  return s;
}

struct SyntheticPath {
  MatrixOdePath path;
  std::vector<double> log_trace;  // integral of Tr M from 0
};

SyntheticPath integrate(const Synthetic& s, double tau, int samples, int substeps) {
  SyntheticPath out;
  out.path.times = uniform_times(tau, samples);
  out.path.remainders.emplace();
  double h = tau / ((samples - 1) * substeps), t = 0.0, L = 0.0;
  SymMatrix M = s.M0;
  auto f = [&](double tt, const SymMatrix& m) { return m.square() + s.P(tt); };
  for (int k = 0; k < samples; ++k) {
    out.path.mats.push_back(M);
    out.path.remainders->push_back(s.P(t));
    out.log_trace.push_back(L);
    if (k + 1 == samples) break;
    for (int j = 0; j < substeps; ++j) {
      SymMatrix k1 = f(t, M), k2 = f(t + h / 2, M + (h / 2) * k1), k3 = f(t + h / 2, M + (h / 2) * k2),
                k4 = f(t + h, M + h * k3);
      SymMatrix M1 = M + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      L += (h / 6) * (M.trace() + 2.0 * (M + (h / 2) * k1).trace() + 2.0 * (M + (h / 2) * k2).trace() +
                      (M + h * k3).trace());
      M = M1;
      t += h;
    }
  }
  return out;
}

Outcome ac2() {
  Outcome o;
  const double tau = 1.0;
  int failures = 0;
  double worst_eq = 0.0;
  for (int i = 0; i < 200; ++i) {
    Synthetic s = make_synthetic(i, false);
    SyntheticPath sp = integrate(s, tau, 129, 8);
    std::string tag = "ode " + std::to_string(i) + ": ";
    bool ok = true;
    for (const auto& m : sp.path.mats) ok = ok && m.finite();
    if (!ok) {
      o.require(false, tag + "blew up");
      ++failures;
      continue;
    }
    CheckReport ode = check_matrix_ode(sp.path);
    if (!ode.pass) {
      o.require(false, tag + "matrix ODE " + num(ode.worst_margin));
      ++failures;
    }
    auto dirs = probe_directions(s.M0, 8, 100 + i);
    for (std::size_t k = 0; k < sp.path.times.size(); ++k) {
      double t = sp.path.times[k];
      const SymMatrix& M = sp.path.mats[k];
      for (const auto& w : dirs) {
        Bound b = riccati_lower_bound(s.M0, w, t);
        if (b.vacuous || M.quad(w) < b.value - 1e-9) ok = false;
      }
      Bound tb = trace_lower_bound(s.M0, t);
      if (tb.vacuous || M.trace() < tb.value - 1e-9) ok = false;
      Bound lb = log_bound(s.M0, t);
      if (lb.vacuous || sp.log_trace[k] < lb.value - 1e-9) ok = false;
    }
    if (!ok) {
      o.require(false, tag + "bound violated");
      ++failures;
    }
    for (int j = 0; j < 8; ++j) {
      CheckReport c = concavity_profile(sp.path, random_unit(s.M0.dim(), 300 + i, j));
      if (!c.pass) {
        o.require(false, tag + "concavity " + c.witness.label);
        ++failures;
        break;
      }
    }
    if (i < 20) {
      Synthetic c = make_synthetic(i, true);
      SyntheticPath cp = integrate(c, tau, 129, 8);
      for (std::size_t k = 0; k < cp.path.times.size(); ++k) {
        double t = cp.path.times[k];
        const SymMatrix& M = cp.path.mats[k];
        for (int a = 0; a < c.M0.dim(); ++a)
          worst_eq = std::max(worst_eq, std::fabs(M.quad(Vec::unit(c.M0.dim(), a)) -
                                                  riccati_lower_bound(c.M0, Vec::unit(c.M0.dim(), a), t).value));
        worst_eq = std::max(worst_eq, std::fabs(M.trace() - trace_lower_bound(c.M0, t).value));
        worst_eq = std::max(worst_eq, std::fabs(cp.log_trace[k] - log_bound(c.M0, t).value));
      }
    }
  }
  o.require(worst_eq <= 1e-8, "commuting path equality gap " + num(worst_eq));
  if (o.pass) o.detail = "200 ODEs, commuting equality gap " + num(worst_eq);
  else o.detail += " (" + std::to_string(failures) + " failures)";
  return o;
}

Outcome ac3() {
  Outcome o;
  Built h = build("heat_gaussian");
  double tp = 0.0, tm_oracle = 0.0;
  std::vector<SymMatrix> Tm;
  for (const auto& r : h.s.rec) {
    tp = std::max(tp, r.Tplus.max_abs());
    tm_oracle = std::max(tm_oracle, std::fabs(r.Tminus(0, 0) + 1.0 / (1.0 + r.t)));  // -sigma / (v0 + sigma t)
    Tm.push_back(r.Tminus);
  }
  FdMatrixSeries d = differentiate(Tm, h.s.dt());
  double heat_gap = 0.0;
  for (std::size_t k = 0; k < Tm.size(); ++k) heat_gap = std::max(heat_gap, (d.value[k] - Tm[k].square()).max_abs());
  o.require(tp <= 1e-6, "T+ " + num(tp));
  o.require(heat_gap <= 1e-4, "heat dT- - T-^2 " + num(heat_gap));
  o.require(tm_oracle <= 1e-6, "T- vs closed form " + num(tm_oracle));

  Built z = build("dilation");
  std::vector<SymMatrix> S;
  double s_oracle = 0.0;
  for (const auto& r : z.s.rec) {
    S.push_back(r.S);
    s_oracle = std::max(s_oracle, std::fabs(r.S(0, 0) + 0.25 / (1.0 + 0.25 * r.t)));  // -b / (a + b t)
  }
  FdMatrixSeries dz = differentiate(S, z.s.dt());
  double dil_gap = 0.0;
  for (std::size_t k = 0; k < S.size(); ++k) dil_gap = std::max(dil_gap, (dz.value[k] - S[k].square()).max_abs());
  o.require(dil_gap <= 1e-4, "dilation dS - S^2 " + num(dil_gap));
  o.require(s_oracle <= 1e-6, "dilation S vs closed form " + num(s_oracle));
  if (o.pass)
    o.detail = "|T+| " + num(tp) + ", heat gap " + num(heat_gap) + ", dilation gap " + num(dil_gap);
  return o;
}

Outcome ac4() {
  Outcome o;
  double worst = 1e300;
  for (const char* name : {"bridge_gaussian", "confined_pressureless"}) {
    Built b = build(name);
    for (const auto& r : {check_T_inequality(b.s), check_S_inequality(b.s)}) {
      o.require(r.pass, std::string(name) + " " + r.name + " at " + r.witness.label);
      for (const auto& p : r.parts)
        if (p.name.find("dM - M^2 - R") != std::string::npos) {
          worst = std::min(worst, p.margin);
          o.require(p.margin >= -1e-4, std::string(name) + " " + p.name + " " + num(p.margin));
        }
    }
  }
  if (o.pass) o.detail = "worst differential margin " + num(worst);
  return o;
}

Outcome ac5() {
  Outcome o;
  Built h = build("heat_gaussian");
  const double v0 = 1.0, sigma = 1.0, tau = h.s.tau();
  double actual = -0.5 * std::log(1.0 + sigma * tau / v0);
  double bound = -std::log(1.0 + sigma * tau / (2.0 * v0));
  double dE = h.s.rec.back().E - h.s.rec.front().E;
  o.require(std::fabs(dE - actual) <= 1e-6, "heat entropy change off by " + num(dE - actual));
  CheckReport r = check_entropy_growth(h.s);
  const CheckPart* lower = find_part(r, "lower");
  o.require(r.pass && lower, "heat entropy growth check");
  if (lower) o.require(std::fabs(lower->margin - (actual - bound)) <= 1e-6, "slack " + num(lower->margin));
  Built b = build("bridge_symmetric");
  CheckReport br = check_entropy_growth(b.s);
  o.require(br.pass && find_part(br, "lower") && find_part(br, "upper"), "symmetric bridge bracket");
  if (o.pass)
    o.detail = "analytic slack " + num(actual - bound) + ", measured " + num(lower->margin) + "; bracket " +
               num(find_part(br, "lower")->margin) + " / " + num(find_part(br, "upper")->margin);
  return o;
}

Outcome ac6() {
  Outcome o;
  double worst = 1e300;
  for (const char* name : {"bridge_gaussian", "bridge_spread", "bridge_concentrated"}) {
    Built b = build(name);
    CheckReport r = check_turnpike(b.s, {.tol = 1e-6});
    o.require(r.pass && r.worst_margin >= -1e-6, std::string(name) + " " + num(r.worst_margin));
    worst = std::min(worst, r.worst_margin);
  }
  if (o.pass) o.detail = "smallest bound - lambda_max " + num(worst);
  return o;
}

Outcome ac7() {
  Outcome o;
  double drift = 0.0, ident = 0.0, mat = 0.0;
  for (const char* name : {"heat_gaussian", "bridge_gaussian", "bridge_symmetric", "bridge_spread",
                           "bridge_concentrated"}) {
    Built b = build(name);
    const double O0 = b.s.rec.front().O;
    for (const auto& r : b.s.rec) drift = std::max(drift, std::fabs(r.O - O0) / (1.0 + std::fabs(O0)));
    CheckReport e = check_energy(b.s), c = check_cost_identity(b.s);
    o.require(e.pass, std::string(name) + " energy");
    o.require(c.pass, std::string(name) + " cost identity " + num(c.worst_margin));
    ident = std::min(ident, c.worst_margin);
    if (b.s.family == Family::Bridge) {
      CheckReport m = check_matrix_energy(b.s);
      o.require(m.pass, std::string(name) + " matrix energy");
      for (const auto& r : b.s.rec)
        mat = std::max(mat, (matrix_energy(r.V, r.I, b.s.sigma) - matrix_energy(b.s.rec[0].V, b.s.rec[0].I, b.s.sigma))
                                .max_abs());
    }
  }
  o.require(drift <= 1e-5, "energy drift " + num(drift));
  o.require(mat <= 1e-5, "matrix energy drift " + num(mat));
  if (o.pass)
    o.detail = "energy drift " + num(drift) + ", matrix drift " + num(mat) + ", identity margin " + num(ident);
  return o;
}

Outcome ac8() {
  Outcome o;
  Scenario sc = load_scenario(scenario_path("bridge_longtime"));
  BridgePair pair{build_density(sc.rho0, sc.grid, sc.base_dir), build_density(sc.rho1, sc.grid, sc.base_dir)};
  LongtimeSetup st;
  st.taus = {1.0, 2.0, 4.0};
  std::vector<LongtimeRow> rows;
  CheckReport r = check_longtime(pair, st, {}, &rows);
  o.require(r.pass, "longtime " + r.witness.label + " " + num(r.worst_margin));
  double rel = 0.0;
  for (const auto& row : rows)
    rel = std::max(rel, std::fabs(row.dC_envelope(0, 0) + row.O(0, 0)) / std::fabs(row.O(0, 0)));
  o.require(rel <= 0.05, "envelope mismatch " + num(rel));
  if (o.pass) o.detail = "taus 1,2,4; envelope vs -O relative gap " + num(rel);
  return o;
}

Outcome ac9() {
  Outcome o;
  double worst = 1e300, trace = 0.0;
  for (const char* name : {"bridge_gaussian", "bridge_spread"}) {
    Scenario sc = load_scenario(scenario_path(name));
    BridgePair pair{build_density(sc.rho0, sc.grid, sc.base_dir), build_density(sc.rho1, sc.grid, sc.base_dir)};
    for (const auto& r : {check_evi(pair, {}), check_contraction(pair, {})}) {
      o.require(r.pass, std::string(name) + " " + r.name + " " + r.witness.label + " " + num(r.worst_margin));
      worst = std::min(worst, r.worst_margin);
      const CheckPart* p = find_part(r, "trace identity");
      o.require(p != nullptr, std::string(name) + " " + r.name + " has no trace identity part");
      if (p) trace = std::max(trace, -p->margin);
    }
  }
  o.require(trace <= 1e-6, "trace identity error " + num(trace));
  if (o.pass) o.detail = "worst margin " + num(worst) + ", trace identity error " + num(trace);
  return o;
}

Outcome ac10() {
  Outcome o;
  Built f = build("fault_sign_flip");
  bool caught = false;
  std::string witness;
  for (const auto& r : {check_T_inequality(f.s), check_S_inequality(f.s)})
    if (!r.pass && !r.witness.label.empty()) {
      caught = true;
      witness = r.name + " [" + r.witness.label + "]";
    }
  o.require(caught, "sign flip not detected");
  MatrixOdePath p;
  p.times = uniform_times(1.0, 33);
  for (double t : p.times) {
    Vec d(2);
    d[0] = -t;
    d[1] = -t;
    p.mats.push_back(SymMatrix::diagonal(d));
  }
  CheckReport a = check_matrix_ode(p);
  o.require(!a.pass && !a.witness.label.empty(), "anti-diffusive path not detected");
  Built q = build("fault_theta_perturb");
  CheckReport res = check_residual(q.tr);
  o.require(!res.pass, "phase perturbation not detected");
  if (o.pass)
    o.detail = "sign flip -> " + witness + ", diag(-t) -> [" + a.witness.label + "] at t=" + num(a.witness.time) +
               ", perturbation -> residual [" + res.witness.label + "]";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac11() {
  Outcome o;
  for (const char* name : {"bridge_gaussian", "mfg_periodic_well"}) {
    fs::path base = fs::temp_directory_path() / "dflow_acceptance";
    std::vector<fs::path> dirs{base / (std::string(name) + "_a"), base / (std::string(name) + "_b")};
    for (const auto& d : dirs) {
      fs::remove_all(d);
      GlobalFlags f;
      f.out = d.string();
      std::ostringstream os, es;
      cmd_check(scenario_path(name), f, os, es);
    }
    int files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
      if (!e.is_regular_file()) continue;
      fs::path other = dirs[1] / fs::relative(e.path(), dirs[0]);
      ++files;
      o.require(fs::exists(other) && slurp(e.path()) == slurp(other),
                std::string(name) + " differs in " + fs::relative(e.path(), dirs[0]).string());
    }
    o.require(files > 5, std::string(name) + " produced too few files");
  }
  double worst = 0.0;
  std::string where;
  for (const char* name : {"uniform_stationary", "heat_gaussian", "bridge_gaussian", "bridge_symmetric",
                           "bridge_spread", "bridge_concentrated", "dilation", "confined_pressureless",
                           "mfg_periodic_well"}) {
    Scenario sc = load_scenario(scenario_path(name));
    FunctionalSeries a = assemble_series(build_flow(sc), sc.series);
    Scenario rs = refined_scenario(sc, 2);
    FunctionalSeries b = assemble_series(build_flow(rs), rs.series);
    auto note = [&](double d, const char* what) {
      if (d > worst) {
        worst = d;
        where = std::string(name) + " " + what;
      }
    };
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto& x = a.rec[k];
      const auto& y = b.rec[2 * k];
      note(std::fabs(x.E - y.E), "E");
      if (std::isfinite(x.O)) note(std::fabs(x.O - y.O), "O");
      note((x.S - y.S).max_abs(), "S");
      note((x.I - y.I).max_abs(), "I");
      note((x.V - y.V).max_abs(), "V");
      note((x.Tplus - y.Tplus).max_abs(), "T+");
      note((x.Tminus - y.Tminus).max_abs(), "T-");
      note((x.Emat - y.Emat).max_abs(), "Emat");
    }
  }
  o.require(worst <= 1e-5, "refinement change " + num(worst) + " in " + where);
  if (o.pass) o.detail = "byte-identical reruns; largest refinement change " + num(worst) + " (" + where + ")";
  return o;
}

}  // namespace

int main() {
  struct Item {
    const char* id;
    const char* title;
    std::function<Outcome()> fn;
  };
  std::vector<Item> items{
      {"AC1", "derivative formulas", ac1},       {"AC2", "matrix comparison", ac2},
      {"AC3", "equality cases", ac3},            {"AC4", "matrix inequalities", ac4},
      {"AC5", "entropy growth", ac5},            {"AC6", "turnpike", ac6},
      {"AC7", "conservation and cost", ac7},     {"AC8", "large time", ac8},
      {"AC9", "EVI and contraction", ac9},       {"AC10", "fault detection", ac10},
      {"AC11", "determinism and refinement", ac11},
  };
  int failed = 0;
  for (const auto& it : items) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s  %s: %s (%.1f s)\n", it.id, o.pass ? "PASS" : "FAIL", it.title, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
