#include "dflow/checkers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>

#include "dflow/error.hpp"
#include "dflow/matrix_comparison.hpp"
#include "dflow/time_series.hpp"

namespace dflow {

namespace {

constexpr double kFloorTol = 1e-6;

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(n);
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

CheckReport start(const std::string& name, const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep;
  rep.name = name;
  rep.seed = opt.seed;
  rep.hypotheses = s.stamps.describe();
  for (const auto& n : s.notes) rep.notes.push_back(n);
  return rep;
}

bool require_samples(CheckReport& rep, const FunctionalSeries& s) {
  if (s.size() >= 5) return true;
  rep.refuse("fewer than 5 samples");
  return false;
}

// Spatial resolution certificate: disagreement of the alternate functional forms.
double certificate(const FunctionalSeries& s) {
  double c = 0.0;
  for (const auto& r : s.rec) c = std::max({c, r.fisher_discrepancy, r.sprod_discrepancy});
  return c;
}

template <class F>
std::vector<SymMatrix> collect(const FunctionalSeries& s, F f) {
  std::vector<SymMatrix> out;
  out.reserve(s.size());
  for (const auto& r : s.rec) out.push_back(f(r));
  return out;
}

double fd_error(const std::vector<SymMatrix>& mats, double dt) {
  FdMatrixSeries d = differentiate(mats, dt);
  double e = 0.0;
  for (std::size_t k = 1; k + 1 < mats.size(); ++k) e = std::max(e, d.error[k]);
  return e;
}

// Trapezoid value and a Richardson estimate of its error from the every-other-sample rule.
std::pair<double, double> trapezoid_with_error(const std::vector<double>& t, const std::vector<double>& f) {
  double full = trapezoid(t, f);
  if (t.size() < 5) return {full, 0.0};
  // Odd-length prefix so that the coarse rule shares the same nodes.
  std::size_t m = t.size() % 2 == 1 ? t.size() : t.size() - 1;
  std::vector<double> t1(t.begin(), t.begin() + m), f1(f.begin(), f.begin() + m), t2, f2;
  for (std::size_t k = 0; k < m; k += 2) {
    t2.push_back(t[k]);
    f2.push_back(f[k]);
  }
  return {full, std::fabs(trapezoid(t1, f1) - trapezoid(t2, f2)) / 3.0};
}

void absorb(CheckReport& rep, const CheckReport& sub, const std::string& prefix) {
  for (const auto& p : sub.parts) {
    Vec dir(static_cast<int>(sub.witness.direction.size()));
    for (int i = 0; i < dir.dim; ++i) dir[i] = sub.witness.direction[i];
    bool is_witness = p.name == sub.witness.label;
    rep.observe(prefix + p.name, p.margin, p.tolerance, is_witness ? sub.witness.time : 0.0,
                is_witness && dir.dim > 0 ? &dir : nullptr, is_witness ? sub.witness.eigen_index : -1);
  }
}

struct MatrixCheck {
  std::string label;
  std::vector<SymMatrix> mats, remainders;
};

// Differential inequality plus the comparison consequences for one matrix path.
void run_matrix_family(CheckReport& rep, const FunctionalSeries& s, const MatrixCheck& mc, const CheckOptions& opt,
                       double cert, bool trace_integral_from_entropy) {
  const std::vector<double> t = s.times();
  const double dt = s.dt(), tau = s.tau(), t0 = t.front();
  const std::size_t m = s.size();

  double fd = fd_error(mc.mats, dt);
  double ode_tol = opt.tol > 0.0 ? opt.tol : std::max(kFloorTol, fd + cert);
  MatrixOdePath path{t, mc.mats, mc.remainders};
  CheckReport ode = check_matrix_ode(path, ode_tol);
  absorb(rep, ode, mc.label + ": ");

  double bound_tol = opt.tol > 0.0 ? opt.tol : std::max(kFloorTol, cert);
  const SymMatrix& M0 = mc.mats.front();
  for (const Vec& w : probe_directions(M0, opt.random_directions, opt.seed)) {
    for (std::size_t k = 1; k + 1 < m; ++k) {
      Bound b = riccati_lower_bound(M0, w, t[k] - t0);
      double margin = mc.mats[k].quad(w) - b.value;
      if (b.vacuous) rep.notes.push_back(mc.label + ": riccati pole reached by " + fmt("%.6g", b.offending));
      rep.observe(mc.label + ": riccati bound", margin, bound_tol, t[k], &w);
    }
    MatrixOdePath p2{t, mc.mats, std::nullopt};
    CheckReport cc = concavity_profile(p2, w, bound_tol);
    absorb(rep, cc, mc.label + ": ");
  }
  for (std::size_t k = 1; k + 1 < m; ++k) {
    Bound b = trace_lower_bound(M0, t[k] - t0);
    if (b.vacuous) rep.notes.push_back(mc.label + ": trace pole reached by " + fmt("%.6g", b.offending));
    rep.observe(mc.label + ": trace bound", mc.mats[k].trace() - b.value, bound_tol, t[k]);
  }
  Bound lb = log_bound(M0, tau);
  if (lb.vacuous) rep.notes.push_back(mc.label + ": log bound pole reached by " + fmt("%.6g", lb.offending));
  double integral, qerr = 0.0;
  if (trace_integral_from_entropy) {
    integral = s.rec.back().E - s.rec.front().E;
  } else {
    std::vector<double> tr(m);
    for (std::size_t k = 0; k < m; ++k) tr[k] = mc.mats[k].trace();
    std::tie(integral, qerr) = trapezoid_with_error(t, tr);
  }
  double log_tol = opt.tol > 0.0 ? opt.tol : std::max(kFloorTol, 2.0 * qerr + cert);
  rep.observe(mc.label + ": log-trace bound", integral - lb.value, log_tol, t.back());
}

// Report tolerance max(1e-6, C_fd dt^2 + certificate), fixed before any margin is observed.
void set_tolerance(CheckReport& rep, const FunctionalSeries& s, const CheckOptions& opt, double cert,
                   const std::vector<std::vector<SymMatrix>>& paths) {
  const double dt = s.dt();
  for (const auto& p : paths) rep.c_fd = std::max(rep.c_fd, fd_error(p, dt) / (dt * dt));
  rep.c_sp = cert;
  rep.tolerance = opt.tol > 0.0 ? opt.tol : std::max(kFloorTol, rep.c_fd * dt * dt + cert);
}

}  // namespace

std::vector<Vec> random_basis(int n, std::uint64_t seed) {
  std::vector<Vec> basis;
  for (int i = 0; basis.size() < static_cast<std::size_t>(n); ++i) {
    Vec w = random_unit(n, seed, 1000 + i);
    for (const Vec& b : basis) w = w - w.dot(b) * b;
    if (w.norm() < 1e-6) continue;
    basis.push_back(w.normalized());
  }
  return basis;
}

CheckReport check_T_inequality(const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep = start("T_inequality", s, opt);
  if (!s.stamps.theorem_eligible()) rep.refuse("trajectory is not theorem-eligible");
  if (!require_samples(rep, s) || !rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  double cert = certificate(s);
  auto rem = collect(s, [](const SeriesRecord& r) { return r.remainder; });
  auto tp = collect(s, [](const SeriesRecord& r) { return r.Tplus; });
  auto tm = collect(s, [](const SeriesRecord& r) { return r.Tminus; });
  set_tolerance(rep, s, opt, cert, {tp, tm});
  run_matrix_family(rep, s, {"T+", tp, rem}, opt, cert, false);
  run_matrix_family(rep, s, {"T-", tm, rem}, opt, cert, false);
  rep.finalize();
  return rep;
}

CheckReport check_S_inequality(const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep = start("S_inequality", s, opt);
  if (!s.stamps.theorem_eligible()) rep.refuse("trajectory is not theorem-eligible");
  if (!require_samples(rep, s) || !rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  double cert = certificate(s);
  const double q = 0.25 * s.sigma * s.sigma;
  auto rem = collect(s, [q](const SeriesRecord& r) { return r.remainder + q * r.I.square(); });
  auto sm = collect(s, [](const SeriesRecord& r) { return r.S; });
  set_tolerance(rep, s, opt, cert, {sm});
  run_matrix_family(rep, s, {"S", sm, rem}, opt, cert, true);
  rep.finalize();
  return rep;
}

CheckReport check_entropy_growth(const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep = start("entropy_growth", s, opt);
  if (!s.stamps.theorem_eligible()) rep.refuse("trajectory is not theorem-eligible");
  if (s.size() < 2) rep.refuse("fewer than 2 samples");
  if (!rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  double cert = certificate(s);
  double tol = opt.tol > 0.0 ? opt.tol : std::max(kFloorTol, cert);
  rep.tolerance = tol;
  rep.c_sp = cert;
  const double tau = s.tau();
  const double dE = s.rec.back().E - s.rec.front().E;
  Bound lo = log_bound(s.rec.front().S, tau);
  if (lo.vacuous) rep.notes.push_back("lower bound pole reached by " + fmt("%.6g", lo.offending));
  rep.observe("lower", dE - lo.value, tol, s.rec.back().t);
  if (s.boundary == Boundary::Planning) {
    double up = 0.0;
    bool pole = false;
    for (double l : sym_eig(s.rec.back().S).values) {
      if (1.0 + tau * l <= 0.0) {
        pole = true;
        rep.notes.push_back("upper bound pole reached by " + fmt("%.6g", l));
        break;
      }
      up += std::log1p(tau * l);
    }
    rep.observe("upper", pole ? -std::numeric_limits<double>::infinity() : up - dE, tol, s.rec.back().t);
  } else {
    rep.notes.push_back("one-sided: boundary is " + std::string(boundary_name(s.boundary)));
  }
  rep.finalize();
  return rep;
}

CheckReport check_turnpike(const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep = start("turnpike", s, opt);
  if (!(s.sigma > 0.0)) rep.refuse("sigma must be positive");
  if (!s.stamps.theorem_eligible()) rep.refuse("trajectory is not theorem-eligible");
  if (!require_samples(rep, s) || !rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  rep.tolerance = opt.tol > 0.0 ? opt.tol : kFloorTol;
  const double t0 = s.rec.front().t, tau = s.tau();
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    double t = s.rec[k].t - t0;
    double bound = (1.0 / s.sigma) * (1.0 / t + 1.0 / (tau - t));
    EigenDecomposition e = sym_eig(s.rec[k].I);
    rep.observe("fisher bound", bound - e.values.front(), rep.tolerance, s.rec[k].t, &e.vectors.front(), 0);
  }
  rep.finalize();
  return rep;
}

CheckReport check_energy(const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep = start("energy", s, opt);
  if (!s.interaction_free) rep.refuse("interaction W must vanish");
  if (s.size() < 2) rep.refuse("fewer than 2 samples");
  if (!rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  rep.tolerance = opt.tol > 0.0 ? opt.tol : 1e-5;
  const double O0 = s.rec.front().O;
  for (const auto& r : s.rec) rep.observe("|O(t)-O(0)|", -std::fabs(r.O - O0) / (1.0 + std::fabs(O0)), rep.tolerance, r.t);
  rep.finalize();
  return rep;
}

CheckReport check_matrix_energy(const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep = start("matrix_energy", s, opt);
  if (!s.entropic) rep.refuse("U, W and f must vanish");
  if (s.size() < 2) rep.refuse("fewer than 2 samples");
  if (!rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  rep.tolerance = opt.tol > 0.0 ? opt.tol : 1e-5;
  SymMatrix O0 = matrix_energy(s.rec.front().V, s.rec.front().I, s.sigma);
  for (const auto& r : s.rec) {
    SymMatrix d = matrix_energy(r.V, r.I, s.sigma) - O0;
    rep.observe("entrywise drift", -d.max_abs(), rep.tolerance, r.t);
  }
  rep.finalize();
  return rep;
}

namespace {

struct CostSides {
  double lhs[2], mid[2], qerr = 0.0;
};

// index 0 is the + branch, 1 the - branch.
CostSides cost_sides(const FunctionalSeries& s) {
  CostSides c{};
  const std::vector<double> t = s.times();
  const double sig = s.sigma, tau = s.tau();
  CostResult cr = cost_accumulate(s, sig);
  double O = 0.0;
  for (const auto& r : s.rec) O += r.O;
  O /= static_cast<double>(s.size());
  const double dE = s.rec.back().E - s.rec.front().E;
  for (int b = 0; b < 2; ++b) {
    double sign = b == 0 ? 1.0 : -1.0;
    std::vector<double> tr(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) tr[k] = (b == 0 ? s.rec[k].Tplus : s.rec[k].Tminus).trace();
    auto [val, err] = trapezoid_with_error(t, tr);
    c.lhs[b] = 0.5 * sig * val;
    c.qerr = std::max(c.qerr, 0.5 * sig * err);
    c.mid[b] = 0.5 * sig * dE + sign * (cr.C_tau - tau * O) - sign * 2.0 * cr.F_minus_U;
  }
  // The cost integrals carry their own trapezoid error.
  std::vector<double> cint(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& r = s.rec[k];
    cint[k] = 0.5 * r.V.trace() - r.U_int + 0.125 * sig * sig * r.I.trace() + r.F_int;
  }
  c.qerr += trapezoid_with_error(t, cint).second;
  return c;
}

}  // namespace

CheckReport check_cost_identity(const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep = start("cost_identity", s, opt);
  if (!s.energy_setting) rep.refuse("needs sigma > 0 and W = 0");
  if (!require_samples(rep, s) || !rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  CostSides c = cost_sides(s);
  rep.tolerance = opt.tol > 0.0 ? opt.tol : std::max(1e-4, 4.0 * c.qerr);
  rep.observe("+ branch", -std::fabs(c.lhs[0] - c.mid[0]), rep.tolerance, s.rec.back().t);
  rep.observe("- branch", -std::fabs(c.lhs[1] - c.mid[1]), rep.tolerance, s.rec.back().t);
  rep.notes.push_back("quadrature error estimate " + fmt("%.3g", c.qerr));
  rep.finalize();
  return rep;
}

CheckReport check_cost_inequality(const FunctionalSeries& s, const CheckOptions& opt) {
  CheckReport rep = start("cost_inequality", s, opt);
  if (!s.energy_setting) rep.refuse("needs sigma > 0 and W = 0");
  if (!s.stamps.theorem_eligible()) rep.refuse("trajectory is not theorem-eligible");
  if (!require_samples(rep, s) || !rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  CostSides c = cost_sides(s);
  double cert = certificate(s);
  rep.tolerance = opt.tol > 0.0 ? opt.tol : std::max(kFloorTol, 4.0 * c.qerr + cert);
  const double sig = s.sigma, tau = s.tau();
  const bool two_sided = s.boundary == Boundary::Planning;
  for (int b = 0; b < 2; ++b) {
    const char* name = b == 0 ? "+" : "-";
    const SymMatrix& M0 = b == 0 ? s.rec.front().Tplus : s.rec.front().Tminus;
    Bound lo = log_bound(M0, tau);
    rep.observe(std::string(name) + " lower", c.mid[b] - 0.5 * sig * lo.value, rep.tolerance, s.rec.front().t);
    if (!two_sided) continue;
    const SymMatrix& M1 = b == 0 ? s.rec.back().Tplus : s.rec.back().Tminus;
    double up = 0.0;
    bool pole = false;
    for (double l : sym_eig(M1).values) {
      if (1.0 + tau * l <= 0.0) pole = true;
      else up += std::log1p(tau * l);
    }
    double margin = pole ? -std::numeric_limits<double>::infinity() : 0.5 * sig * up - c.mid[b];
    rep.observe(std::string(name) + " upper", margin, rep.tolerance, s.rec.back().t);
  }
  if (!two_sided) rep.notes.push_back("one-sided: boundary is " + std::string(boundary_name(s.boundary)));
  rep.finalize();
  return rep;
}

CheckReport check_time_symmetry(const FlowTrajectory& traj, const CheckOptions& opt) {
  SeriesOptions so;
  so.threads = opt.threads;
  FunctionalSeries fwd = assemble_series(traj, so);
  FunctionalSeries rev = assemble_series(reverse_trajectory(traj), so);
  CheckReport rep = start("time_symmetry", fwd, opt);
  const std::size_t m = fwd.size();
  std::vector<std::vector<SymMatrix>> rev_paths;
  if (m >= 5) {
    rev_paths.push_back(collect(rev, [](const SeriesRecord& r) { return r.Tplus; }));
    rev_paths.push_back(collect(rev, [](const SeriesRecord& r) { return r.Tminus; }));
    set_tolerance(rep, rev, opt, certificate(rev), rev_paths);
  }
  const double id_tol = 1e-8;
  for (std::size_t k = 0; k < m; ++k) {
    const auto& r = rev.rec[k];
    const auto& f = fwd.rec[m - 1 - k];
    rep.observe("S~ = -S(tau-t)", -(r.S + f.S).max_abs(), id_tol, r.t);
    rep.observe("I~ = I(tau-t)", -(r.I - f.I).max_abs(), id_tol, r.t);
    rep.observe("T+~ = -T-(tau-t)", -(r.Tplus + f.Tminus).max_abs(), id_tol, r.t);
    rep.observe("T-~ = -T+(tau-t)", -(r.Tminus + f.Tplus).max_abs(), id_tol, r.t);
  }
  if (m >= 5) {
    double cert = certificate(rev);
    auto rem = collect(rev, [](const SeriesRecord& r) { return r.remainder; });
    for (int b = 0; b < 2; ++b) {
      const auto& mats = rev_paths[b];
      double tol = opt.tol > 0.0 ? opt.tol : std::max(kFloorTol, fd_error(mats, rev.dt()) + cert);
      CheckReport ode = check_matrix_ode({rev.times(), mats, rem}, tol);
      absorb(rep, ode, b == 0 ? "reversed T+: " : "reversed T-: ");
    }
  }
  rep.finalize();
  return rep;
}

CheckReport check_residual(const FlowTrajectory& traj, const CheckOptions& opt) {
  CheckReport rep;
  rep.name = "residual";
  rep.seed = opt.seed;
  rep.hypotheses = traj.stamps.describe();
  double limit = 1e-5;
  switch (traj.family) {
    case Family::Stationary: limit = 1e-8; break;
    case Family::Heat: limit = 1e-6; break;
    case Family::ZeroViscosity: limit = 1e-5; break;
    case Family::Bridge: limit = 1e-5; break;
    case Family::Mfg: limit = 1e-4; break;
  }
  if (opt.tol > 0.0) limit = opt.tol;
  rep.tolerance = limit;
  Residual r = traj.residual ? *traj.residual : pde_residual(traj);
  rep.observe("continuity", -r.continuity, limit, traj.times.front());
  rep.observe("phase", -r.phase, limit, traj.times.front());
  rep.notes.push_back(fmt("continuity %.3g, phase %.3g", r.continuity, r.phase));
  rep.finalize();
  return rep;
}

namespace {

// Trapezoid with the Euler-Maclaurin endpoint correction, given exact derivatives at the ends.
SymMatrix corrected_trapezoid(const std::vector<double>& t, const std::vector<SymMatrix>& f, const SymMatrix& d0,
                              const SymMatrix& d1) {
  double h = t[1] - t[0];
  return trapezoid(t, f) - (h * h / 12.0) * (d1 - d0);
}

struct BridgeFunctionals {
  SymMatrix O, C, Emat;
  std::vector<SymMatrix> flux;  // V + sigma S + sigma^2/4 I
  std::vector<double> times;
  double E0 = 0.0, E1 = 0.0;
  SymMatrix S_end;
};

BridgeFunctionals bridge_functionals(const Density& a, const Density& z, double sigma, double tau, int samples,
                                     const BridgeOptions& bo) {
  FlowTrajectory tr = schrodinger_bridge(a, z, sigma, uniform_times(tau, samples), bo);
  SeriesOptions so;
  so.form_tol = 0.0;
  so.seam_tol = 1.0;
  FunctionalSeries s = assemble_series(tr, so);
  BridgeFunctionals out;
  out.times = s.times();
  const double q = 0.125 * sigma * sigma;
  std::vector<SymMatrix> integrand, Sv;
  SymMatrix Osum(s.dim);
  for (const auto& r : s.rec) {
    integrand.push_back(0.5 * r.V + q * r.I);
    Sv.push_back(r.S);
    Osum += matrix_energy(r.V, r.I, sigma);
    out.flux.push_back(r.V + sigma * r.S + (0.25 * sigma * sigma) * r.I);
  }
  out.O = (1.0 / static_cast<double>(s.size())) * Osum;
  // With U = W = f = 0 the integrand's derivative is (sigma^2/4) dI.
  const double c = 0.25 * sigma * sigma;
  out.C = corrected_trapezoid(out.times, integrand, c * s.rec.front().dI_rhs, c * s.rec.back().dI_rhs);
  out.Emat = corrected_trapezoid(out.times, Sv, s.rec.front().dS_rhs, s.rec.back().dS_rhs);
  out.E0 = entropy(a);
  out.E1 = entropy(z);
  out.S_end = s.rec.back().S;
  return out;
}

}  // namespace

EntropicCost entropic_cost(const Density& mu_a, const Density& mu_z, int samples, const BridgeOptions& opt) {
  BridgeFunctionals bf = bridge_functionals(mu_a, mu_z, std::sqrt(2.0), 1.0, samples, opt);
  EntropicCost ec;
  ec.C_mat = bf.C;
  ec.C = bf.C.trace();
  ec.E_mat = bf.Emat;
  ec.trace_identity_error = std::fabs(bf.Emat.trace() - (bf.E1 - bf.E0));
  ec.dE_end = bf.S_end.trace();
  return ec;
}

CheckReport check_longtime(const BridgePair& pair, const LongtimeSetup& st, const CheckOptions& opt,
                           std::vector<LongtimeRow>* rows) {
  CheckReport rep;
  rep.name = "longtime";
  rep.seed = opt.seed;
  rep.tolerance = opt.tol > 0.0 ? opt.tol : kFloorTol;
  auto taus = st.taus;
  bool ascending = std::is_sorted(taus.begin(), taus.end()) &&
                   std::adjacent_find(taus.begin(), taus.end()) == taus.end();
  bool has_one = std::find(taus.begin(), taus.end(), 1.0) != taus.end();
  if (taus.size() < 3 || !ascending || !has_one) rep.refuse("tau list must be ascending, hold 3 values and include 1");
  if (!(st.sigma > 0.0)) rep.refuse("sigma must be positive");
  if (!rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  const int n = static_cast<int>(taus.size());
  const double d = st.envelope_step;
  // Main bridge plus the two envelope neighbours for every tau.
  std::vector<BridgeFunctionals> bf(3 * n);
  parallel_for(3 * n, opt.threads, [&](int i) {
    double tau = taus[i / 3] * (1.0 + d * (i % 3 - 1));
    bf[i] = bridge_functionals(pair.mu_a, pair.mu_z, st.sigma, tau, st.samples, st.bridge);
  });
  const int dim = bf[0].O.dim();
  const SymMatrix id = SymMatrix::identity(dim);
  const SymMatrix& C1 = bf[3 * static_cast<int>(std::find(taus.begin(), taus.end(), 1.0) - taus.begin()) + 1].C;
  std::vector<LongtimeRow> out;
  for (int j = 0; j < n; ++j) {
    const double tau = taus[j];
    const BridgeFunctionals& b = bf[3 * j + 1];
    LongtimeRow row;
    row.tau = tau;
    row.O = b.O;
    row.C = b.C;
    row.dC_envelope = (1.0 / (2.0 * d * tau)) * (bf[3 * j + 2].C - bf[3 * j].C);

    EigenDecomposition e = sym_eig((0.5 * st.sigma / tau) * id + b.O);
    rep.observe("-O_tau <= sigma/(2 tau)", e.values.back(), rep.tolerance, tau, &e.vectors.back(), dim - 1);
    e = sym_eig(C1 + (0.5 * st.sigma * std::log(tau)) * id - b.C);
    rep.observe("C_tau <= C_1 + (sigma/2) log tau", e.values.back(), rep.tolerance, tau, &e.vectors.back(), dim - 1);
    SymMatrix num = st.sigma * b.Emat + 2.0 * C1 + (st.sigma * std::log(tau)) * id;
    for (std::size_t k = 1; k + 1 < b.times.size(); ++k) {
      double t = b.times[k];
      e = sym_eig((1.0 / (tau - t)) * num - b.flux[k]);
      rep.observe("flux bound", e.values.back(), rep.tolerance, t, &e.vectors.back(), dim - 1);
    }
    double scale = std::max(b.O.max_abs(), 1e-12);
    double err = (row.dC_envelope + b.O).max_abs();
    rep.observe("envelope dC/dtau = -O", -err / scale, st.envelope_rel, tau);
    out.push_back(row);
  }
  // Coarse derivative across the sweep itself, three-point non-uniform stencil.
  for (int j = 1; j + 1 < n; ++j) {
    double h0 = taus[j] - taus[j - 1], h1 = taus[j + 1] - taus[j];
    SymMatrix dc = (-h1 / (h0 * (h0 + h1))) * out[j - 1].C + ((h1 - h0) / (h0 * h1)) * out[j].C +
                   (h0 / (h1 * (h0 + h1))) * out[j + 1].C;
    out[j].dC_sweep = dc;
    out[j].has_sweep = true;
    double rel = (dc + out[j].O).max_abs() / std::max(out[j].O.max_abs(), 1e-12);
    rep.notes.push_back(fmt("sweep-level difference at tau=%.4g: relative mismatch %.3g", taus[j], rel));
  }
  if (rows) *rows = out;
  rep.finalize();
  return rep;
}

CheckReport check_evi(const BridgePair& pair, const EviSetup& st, const CheckOptions& opt) {
  CheckReport rep;
  rep.name = "evi";
  rep.seed = opt.seed;
  rep.tolerance = opt.tol > 0.0 ? opt.tol : 1e-3;
  rep.notes.push_back("finitely many bases sampled: axis basis and one random orthonormal basis");
  const double h = st.fd_step;
  if (!(h > 0.0) || st.t_grid.empty()) rep.refuse("fd_step must be positive and t_grid non-empty");
  for (double t : st.t_grid)
    if (t < 0.0) rep.refuse("t_grid must be non-negative");
  if (!rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  const int dim = pair.mu_a.grid().dim;
  std::vector<Vec> axis;
  for (int i = 0; i < dim; ++i) axis.push_back(Vec::unit(dim, i));
  std::vector<Vec> rnd = random_basis(dim, opt.seed);

  // Offsets in units of h: central when t >= 2h, one-sided forward otherwise.
  struct Job {
    int tk;
    int off;
  };
  std::vector<Job> jobs;
  std::vector<bool> central(st.t_grid.size());
  for (std::size_t k = 0; k < st.t_grid.size(); ++k) {
    central[k] = st.t_grid[k] >= 2.0 * h;
    std::vector<int> offs = central[k] ? std::vector<int>{-2, -1, 0, 1, 2} : std::vector<int>{0, 1, 2, 3, 4};
    for (int o : offs) jobs.push_back({static_cast<int>(k), o});
  }
  std::vector<EntropicCost> res(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), opt.threads, [&](int i) {
    double t = st.t_grid[jobs[i].tk] + jobs[i].off * h;
    Density z = Density::adopt(heat_propagate(pair.mu_z.field(), t, 1.0), pair.mu_z.floor());
    res[i] = entropic_cost(pair.mu_a, z, st.samples, st.bridge);
  });
  double worst_trace = 0.0;
  for (const auto& r : res) worst_trace = std::max(worst_trace, r.trace_identity_error);
  rep.observe("trace identity", -worst_trace, 1e-6, 0.0);

  std::size_t j = 0;
  for (std::size_t k = 0; k < st.t_grid.size(); ++k, j += 5) {
    auto C = [&](int idx) { return res[j + idx].C; };
    double d1, d2;
    if (central[k]) {
      d1 = (C(3) - C(1)) / (2.0 * h);
      d2 = (C(4) - C(0)) / (4.0 * h);
    } else {
      d1 = (-3.0 * C(0) + 4.0 * C(1) - C(2)) / (2.0 * h);
      d2 = (-3.0 * C(0) + 4.0 * C(2) - C(4)) / (4.0 * h);
    }
    double deriv = (4.0 * d1 - d2) / 3.0;
    double fd_err = std::fabs(d1 - d2);
    const EntropicCost& mid = res[j + (central[k] ? 2 : 0)];
    double t = st.t_grid[k];
    rep.notes.push_back(fmt("t=%.4g: dC/dt %.8g", t, deriv) + fmt(", Richardson error %.3g, -Tr S(1)/2 %.8g", fd_err,
                                                                   -0.5 * mid.dE_end));
    double part_tol = std::max(rep.tolerance, 2.0 * fd_err);
    for (int b = 0; b < 2; ++b) {
      const auto& basis = b == 0 ? axis : rnd;
      double rhs = 0.0;
      for (const Vec& w : basis) rhs += 0.5 * (1.0 - std::exp(mid.E_mat.quad(w)));
      rep.observe(b == 0 ? "axis basis" : "random basis", rhs - deriv, part_tol, t);
    }
  }
  rep.finalize();
  return rep;
}

CheckReport check_contraction(const BridgePair& pair, const ContractionSetup& st, const CheckOptions& opt) {
  CheckReport rep;
  rep.name = "contraction";
  rep.seed = opt.seed;
  rep.tolerance = opt.tol > 0.0 ? opt.tol : 1e-3;
  if (st.tau_heat < 0.0 || st.n_steps < 1 || (st.tau_heat > 0.0 && st.n_steps < 2))
    rep.refuse("tau_heat must be non-negative with at least 2 nodes");
  if (!rep.hypotheses_ok) {
    rep.finalize();
    return rep;
  }
  const int nodes = st.tau_heat > 0.0 ? st.n_steps : 1;
  const int dim = pair.mu_a.grid().dim;
  std::vector<double> t(nodes);
  for (int i = 0; i < nodes; ++i) t[i] = nodes == 1 ? 0.0 : st.tau_heat * i / (nodes - 1);
  std::vector<EntropicCost> res(nodes);
  parallel_for(nodes, opt.threads, [&](int i) {
    Density a = Density::adopt(heat_propagate(pair.mu_a.field(), t[i], 1.0), pair.mu_a.floor());
    Density z = Density::adopt(heat_propagate(pair.mu_z.field(), t[i], 1.0), pair.mu_z.floor());
    res[i] = entropic_cost(a, z, st.samples, st.bridge);
  });
  double worst_trace = 0.0;
  std::vector<double> g(nodes);
  for (int i = 0; i < nodes; ++i) {
    worst_trace = std::max(worst_trace, res[i].trace_identity_error);
    for (int a = 0; a < dim; ++a) {
      double s = std::sinh(0.5 * res[i].E_mat.quad(Vec::unit(dim, a)));
      g[i] += s * s;
    }
  }
  rep.observe("trace identity", -worst_trace, 1e-6, 0.0);
  double integral = nodes > 1 ? trapezoid(t, g) : 0.0;
  double margin = res.front().C - integral - res.back().C;
  rep.notes.push_back(fmt("C1 start %.10g, C1 end %.10g", res.front().C, res.back().C) +
                      fmt(", sinh^2 integral %.6g, margin %.6g", integral, margin));
  rep.observe("contraction", margin, rep.tolerance, st.tau_heat);
  rep.finalize();
  return rep;
}

}  // namespace dflow
