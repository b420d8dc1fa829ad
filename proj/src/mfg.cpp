#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "dflow/error.hpp"
#include "dflow/flows.hpp"

namespace dflow {

namespace {

// u = 1/2 <x,Rx> + <h,x> + psi
struct UState {
  ScalarField psi;
  SymMatrix R;
  Vec h;
};

constexpr double kMid[4] = {-1.0 / 16, 9.0 / 16, 9.0 / 16, -1.0 / 16};
constexpr double kMidLeft[4] = {0.3125, 0.9375, -0.3125, 0.0625};
constexpr double kMidRight[4] = {0.0625, -0.3125, 0.9375, 0.3125};

// Cubic interpolation at t_n + dt/2 from the stored nodes.
template <class Get, class T>
T midpoint(std::size_t n, std::size_t last, Get get) {
  const double* w = kMid;
  std::size_t first = n - 1;
  if (last < 3) {
    T a = get(n);
    return a;
  }
  if (n == 0) {
    w = kMidLeft;
    first = 0;
  } else if (n + 2 > last) {
    w = kMidRight;
    first = last - 3;
  }
  T out = get(first);
  out *= w[0];
  for (int j = 1; j < 4; ++j) {
    T v = get(first + j);
    v *= w[j];
    out += v;
  }
  return out;
}

struct FieldOps {
  ScalarField f;
  FieldOps& operator*=(double s) {
    for (double& v : f.values) v *= s;
    return *this;
  }
  FieldOps& operator+=(const FieldOps& o) {
    for (std::size_t p = 0; p < f.size(); ++p) f[p] += o.f[p];
    return *this;
  }
};

struct UOps {
  UState u;
  UOps& operator*=(double s) {
    for (double& v : u.psi.values) v *= s;
    u.R *= s;
    u.h = s * u.h;
    return *this;
  }
  UOps& operator+=(const UOps& o) {
    for (std::size_t p = 0; p < u.psi.size(); ++p) u.psi[p] += o.u.psi[p];
    u.R += o.u.R;
    u.h = u.h + o.u.h;
    return *this;
  }
};

struct VecOps {
  Vec v;
  VecOps& operator*=(double s) {
    v = s * v;
    return *this;
  }
  VecOps& operator+=(const VecOps& o) {
    v = v + o.v;
    return *this;
  }
};

ScalarField lin(const ScalarField& a, double s, const ScalarField& b) {
  ScalarField out = a;
  for (std::size_t p = 0; p < out.size(); ++p) out[p] += s * b[p];
  return out;
}

class MfgSolver {
 public:
  MfgSolver(const Grid& g, const CoefficientSet& co, const MfgOptions& opt)
      : g_(g), co_(co), sigma_(co.sigma), xi_(g), A_(g.dim), c_(g.dim), Ugrid_(g) {
    for (std::size_t p = 0; p < g.size(); ++p) {
      Vec x = g.point(p);
      for (int a = 0; a < g.dim; ++a)
        xi_.comp[a][p] = x[a] * window_value(x[a], g.extent[a], opt.window_inner, opt.window_outer);
    }
    if (co.U.kind == Potential::Kind::Quadratic) {
      A_ = co.U.A;
      c_ = co.U.c;
    } else if (co.U.kind == Potential::Kind::Gridded) {
      Ugrid_ = co.U.values(g);
    }
    b_ = co.W.kind == Interaction::Kind::Quadratic ? co.W.b : 0.0;
  }

  Vec moment(const ScalarField& r) const {
    Vec m(g_.dim);
    double hv = g_.cell_volume();
    for (std::size_t p = 0; p < g_.size(); ++p) m = m + (r[p] * hv) * g_.point(p);
    return m;
  }

  // Backward-time nonlinearity: d/ds u = (sigma/2) lap psi + N.
  UState hjb_rhs(const UState& u, const ScalarField& rho, const Vec& m1) const {
    const int n = g_.dim;
    ScalarField wg(g_);
    if (co_.W.kind == Interaction::Kind::Gridded) wg = circular_convolve(*co_.W.kernel, rho);
    VectorField gp = gradient(u.psi);
    UState d;
    d.psi = ScalarField(g_);
    for (std::size_t p = 0; p < g_.size(); ++p) {
      Vec adv = u.R.apply(xi_.at(p)) + u.h;
      Vec dp = gp.at(p);
      d.psi[p] = adv.dot(dp) + 0.5 * dp.dot(dp) - co_.f.f(rho[p]) - wg[p] + Ugrid_[p];
    }
    d.psi = dealias(d.psi);
    d.R = u.R.square() + A_ + (2.0 * b_) * SymMatrix::identity(n);
    d.h = u.R.apply(u.h) - A_.apply(c_) - (2.0 * b_) * m1;
    return d;
  }

  ScalarField fp_rhs(const ScalarField& rho, const UState& u) const {
    VectorField gp = gradient(u.psi);
    VectorField flux(g_);
    for (std::size_t p = 0; p < g_.size(); ++p) {
      Vec v = u.R.apply(xi_.at(p)) + u.h + gp.at(p);
      for (int a = 0; a < g_.dim; ++a) flux.comp[a][p] = rho[p] * v[a];
    }
    ScalarField d = divergence(flux);
    for (double& v : d.values) v = -v;
    return dealias(d);
  }

  double max_speed(const UState& u) const {
    VectorField gp = gradient(u.psi);
    double vm = 0.0;
    for (std::size_t p = 0; p < g_.size(); ++p) vm = std::max(vm, (u.R.apply(xi_.at(p)) + u.h + gp.at(p)).norm());
    return vm;
  }

  std::vector<UState> hjb(const std::vector<ScalarField>& rho, const UState& terminal, double dt) const {
    std::size_t last = rho.size() - 1;
    std::vector<UState> u(rho.size());
    std::vector<Vec> m1(rho.size());
    for (std::size_t n = 0; n <= last; ++n) m1[n] = moment(rho[n]);
    u[last] = terminal;
    for (std::size_t n = last; n-- > 0;) {
      const UState& y = u[n + 1];
      FieldOps rm = midpoint<std::function<FieldOps(std::size_t)>, FieldOps>(
          n, last, [&](std::size_t j) { return FieldOps{rho[j]}; });
      VecOps mm = midpoint<std::function<VecOps(std::size_t)>, VecOps>(
          n, last, [&](std::size_t j) { return VecOps{m1[j]}; });
      UState k1 = hjb_rhs(y, rho[n + 1], m1[n + 1]);
      UState ya{heat_propagate(lin(y.psi, 0.5 * dt, k1.psi), 0.5 * dt, sigma_), y.R + (0.5 * dt) * k1.R,
                y.h + (0.5 * dt) * k1.h};
      UState k2 = hjb_rhs(ya, rm.f, mm.v);
      ScalarField ehalf = heat_propagate(y.psi, 0.5 * dt, sigma_);
      UState yb{lin(ehalf, 0.5 * dt, k2.psi), y.R + (0.5 * dt) * k2.R, y.h + (0.5 * dt) * k2.h};
      UState k3 = hjb_rhs(yb, rm.f, mm.v);
      ScalarField efull = heat_propagate(y.psi, dt, sigma_);
      UState yc{lin(efull, dt, heat_propagate(k3.psi, 0.5 * dt, sigma_)), y.R + dt * k3.R, y.h + dt * k3.h};
      UState k4 = hjb_rhs(yc, rho[n], m1[n]);
      ScalarField acc = heat_propagate(k1.psi, dt, sigma_);
      ScalarField mid = heat_propagate(lin(k2.psi, 1.0, k3.psi), 0.5 * dt, sigma_);
      UState out;
      out.psi = efull;
      for (std::size_t p = 0; p < out.psi.size(); ++p)
        out.psi[p] += dt / 6.0 * (acc[p] + 2.0 * mid[p] + k4.psi[p]);
      out.R = y.R + (dt / 6.0) * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R);
      out.h = y.h + (dt / 6.0) * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h);
      if (!out.psi.finite() || !out.R.finite())
        throw Error(ErrorKind::HjbOverflow, "non-finite value function at node " + std::to_string(n));
      u[n] = std::move(out);
    }
    return u;
  }

  std::vector<ScalarField> fp(const ScalarField& rho0, const std::vector<UState>& u, double dt) const {
    std::size_t last = u.size() - 1;
    std::vector<ScalarField> rho(u.size());
    rho[0] = rho0;
    for (std::size_t n = 0; n < last; ++n) {
      const ScalarField& y = rho[n];
      UOps um = midpoint<std::function<UOps(std::size_t)>, UOps>(n, last, [&](std::size_t j) { return UOps{u[j]}; });
      ScalarField k1 = fp_rhs(y, u[n]);
      ScalarField k2 = fp_rhs(heat_propagate(lin(y, 0.5 * dt, k1), 0.5 * dt, sigma_), um.u);
      ScalarField ehalf = heat_propagate(y, 0.5 * dt, sigma_);
      ScalarField k3 = fp_rhs(lin(ehalf, 0.5 * dt, k2), um.u);
      ScalarField efull = heat_propagate(y, dt, sigma_);
      ScalarField k4 = fp_rhs(lin(efull, dt, heat_propagate(k3, 0.5 * dt, sigma_)), u[n + 1]);
      ScalarField acc = heat_propagate(k1, dt, sigma_);
      ScalarField mid = heat_propagate(lin(k2, 1.0, k3), 0.5 * dt, sigma_);
      ScalarField out = efull;
      for (std::size_t p = 0; p < out.size(); ++p) out[p] += dt / 6.0 * (acc[p] + 2.0 * mid[p] + k4[p]);
      rho[n + 1] = std::move(out);
    }
    return rho;
  }

 private:
  const Grid& g_;
  const CoefficientSet& co_;
  double sigma_;
  VectorField xi_;
  SymMatrix A_;
  Vec c_;
  ScalarField Ugrid_;
  double b_ = 0.0;
};

}  // namespace

FlowTrajectory mfg_picard(const Density& rho0, const Phase& u_tau, const CoefficientSet& coeffs,
                          const std::vector<double>& times, const MfgOptions& opt, MfgInfo* info) {
  if (!(coeffs.sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "mfg needs sigma > 0");
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw Error(ErrorKind::InvalidArgument, "damping must lie in (0,1]");
  if (!u_tau.logs.empty()) throw Error(ErrorKind::InvalidArgument, "terminal cost must not carry log terms");
  if (times.size() < 2) throw Error(ErrorKind::TooFewSamples, "need at least 2 sample times");
  const Grid& g = rho0.grid();
  require_same_grid(g, u_tau.grid());
  const double sigma = coeffs.sigma;
  const double interval = times[1] - times[0];
  double hmin = g.spacing(0);
  for (int a = 1; a < g.dim; ++a) hmin = std::min(hmin, g.spacing(a));

  MfgSolver solver(g, coeffs, opt);
  UState terminal{u_tau.smooth, u_tau.quad, u_tau.linear};
  FlowTrajectory traj;
  traj.grid = g;
  traj.times = times;
  traj.coeffs = coeffs;
  traj.family = Family::Mfg;
  traj.boundary = Boundary::MeanField;

  int nsub = std::max(1, static_cast<int>(std::ceil(interval / opt.max_step - 1e-12)));
  std::vector<ScalarField> rho_path;
  std::vector<UState> u_path;
  MfgInfo stats;
  for (int attempt = 0;; ++attempt) {
    const std::size_t nodes = (times.size() - 1) * nsub + 1;
    const double dt = interval / nsub;
    rho_path.assign(nodes, ScalarField());
    for (std::size_t n = 0; n < nodes; ++n) rho_path[n] = heat_propagate(rho0.field(), n * dt, sigma);
    stats = MfgInfo();
    double prev = std::numeric_limits<double>::infinity();
    bool restart = false;
    for (int round = 1;; ++round) {
      u_path = solver.hjb(rho_path, terminal, dt);
      double vmax = 0.0;
      for (const auto& u : u_path) vmax = std::max(vmax, solver.max_speed(u));
      if (vmax * dt > opt.cfl * hmin && attempt < 6) {
        nsub = static_cast<int>(std::ceil(interval * vmax / (opt.cfl * hmin)));
        traj.log.push_back("refined internal step to " + std::to_string(nsub) + " substeps per sample");
        restart = true;
        break;
      }
      std::vector<ScalarField> next = solver.fp(rho0.field(), u_path, dt);
      double diff = 0.0;
      for (std::size_t n = 0; n < nodes; ++n) {
        if (!next[n].finite()) throw Error(ErrorKind::HjbOverflow, "non-finite density in Fokker-Planck solve");
        if (next[n].min() < rho0.floor())
          throw Error(ErrorKind::Vacuum, "density " + std::to_string(next[n].min()) + " below floor");
        for (std::size_t p = 0; p < next[n].size(); ++p) diff = std::max(diff, std::fabs(next[n][p] - rho_path[n][p]));
      }
      double factor = std::isfinite(prev) && prev > 0.0 ? diff / prev : 0.0;
      stats.rounds = round;
      stats.last_difference = diff;
      stats.contraction.push_back(factor);
      char buf[128];
      std::snprintf(buf, sizeof buf, "picard round %d: difference %.3g, contraction %.3g", round, diff, factor);
      traj.log.push_back(buf);
      if (diff <= opt.fp_tol) {
        rho_path = std::move(next);
        break;
      }
      if (round >= opt.max_rounds) {
        std::snprintf(buf, sizeof buf, "%d rounds, last difference %.3g, contraction factor %.3g", round, diff, factor);
        throw Error(ErrorKind::PicardStalled, buf);
      }
      for (std::size_t n = 0; n < nodes; ++n)
        for (std::size_t p = 0; p < next[n].size(); ++p)
          rho_path[n][p] = opt.damping * next[n][p] + (1.0 - opt.damping) * rho_path[n][p];
      prev = diff;
    }
    if (!restart) break;
  }

  for (std::size_t k = 0; k < times.size(); ++k) {
    std::size_t n = k * nsub;
    ScalarField r = rho_path[n];
    double mass = integrate(r);
    for (double& v : r.values) v /= mass;
    Density rho;
    try {
      rho = Density::adopt(r, rho0.floor());
    } catch (const Error& e) {
      throw Error(ErrorKind::Vacuum, e.what());
    }
    Phase th(u_path[n].psi);
    th.quad = u_path[n].R;
    th.linear = u_path[n].h;
    th.logs.push_back({-0.5 * sigma, rho.field()});
    th.gauge_fix(rho);
    traj.snaps.push_back({rho, th});
  }
  if (info) *info = stats;
  stamp_hypotheses(traj);
  return traj;
}

}  // namespace dflow
