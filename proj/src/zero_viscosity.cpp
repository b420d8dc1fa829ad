#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dflow/error.hpp"
#include "dflow/flows.hpp"

namespace dflow {

namespace {

// log rho = -1/2 <x,Px> + <h,x> + phi,  theta = 1/2 <x,Qx> + <g,x> + psi
struct State {
  SymMatrix P, Q;
  Vec h, g;
  ScalarField phi, psi;
};

State axpy(const State& s, double a, const State& d) {
  State r = s;
  r.P += a * d.P;
  r.Q += a * d.Q;
  r.h = r.h + a * d.h;
  r.g = r.g + a * d.g;
  for (std::size_t p = 0; p < r.phi.size(); ++p) {
    r.phi[p] += a * d.phi[p];
    r.psi[p] += a * d.psi[p];
  }
  return r;
}

class System {
 public:
  System(const Grid& g, const CoefficientSet& co, const ZeroViscosityOptions& opt)
      : grid_(g), coeffs_(co), xi_(g), A_(g.dim), c_(g.dim), U_grid_(g) {
    for (std::size_t p = 0; p < g.size(); ++p) {
      Vec x = g.point(p);
      for (int a = 0; a < g.dim; ++a)
        xi_.comp[a][p] = x[a] * window_value(x[a], g.extent[a], opt.window_inner, opt.window_outer);
    }
    if (co.U.kind == Potential::Kind::Quadratic) {
      A_ = co.U.A;
      c_ = co.U.c;
    } else if (co.U.kind == Potential::Kind::Gridded) {
      U_grid_ = co.U.values(g);
    }
  }

  ScalarField density(const State& s) const {
    ScalarField r(grid_);
    for (std::size_t p = 0; p < grid_.size(); ++p) {
      Vec x = grid_.point(p);
      r[p] = std::exp(-0.5 * s.P.quad(x) + s.h.dot(x) + s.phi[p]);
    }
    return r;
  }

  State rhs(const State& s, double* vmax) const {
    const int n = grid_.dim;
    const double hv = grid_.cell_volume();
    ScalarField r = density(s);
    Vec m1(n);
    for (std::size_t p = 0; p < grid_.size(); ++p) m1 = m1 + (r[p] * hv) * grid_.point(p);
    ScalarField wg(grid_);
    if (coeffs_.W.kind == Interaction::Kind::Gridded) wg = circular_convolve(*coeffs_.W.kernel, r);
    double b = coeffs_.W.kind == Interaction::Kind::Quadratic ? coeffs_.W.b : 0.0;

    VectorField gpsi = gradient(s.psi);
    VectorField gphi = gradient(s.phi);
    ScalarField lpsi = laplacian(s.psi);
    State d;
    d.psi = ScalarField(grid_);
    d.phi = ScalarField(grid_);
    double vm = 0.0;
    for (std::size_t p = 0; p < grid_.size(); ++p) {
      Vec xi = xi_.at(p);
      Vec adv = s.Q.apply(xi) + s.g;
      Vec dps = gpsi.at(p), dph = gphi.at(p);
      Vec back = s.h - s.P.apply(xi);
      d.psi[p] = -(adv.dot(dps) + 0.5 * dps.dot(dps) - coeffs_.f.f(r[p]) - wg[p] + U_grid_[p]);
      d.phi[p] = -(adv.dot(dph) + dps.dot(back) + dps.dot(dph) + lpsi[p] + s.g.dot(s.h) + s.Q.trace());
      vm = std::max(vm, (adv + dps).norm());
    }
    d.psi = dealias(d.psi);
    d.phi = dealias(d.phi);
    SymMatrix id = SymMatrix::identity(n);
    d.Q = (-1.0) * s.Q.square() - A_ - (2.0 * b) * id;
    d.g = (-1.0) * s.Q.apply(s.g) + A_.apply(c_) + (2.0 * b) * m1;
    d.P = (-2.0) * s.Q.sym_product(s.P);
    d.h = (-1.0) * s.Q.apply(s.h) + s.P.apply(s.g);
    if (vmax) *vmax = vm;
    return d;
  }

  double curvature(const State& s) const {
    ScalarField r = density(s);
    double cut = 1e-6 * r.max();
    SymField hp = hessian(s.psi);
    double worst = 0.0;
    for (std::size_t p = 0; p < grid_.size(); ++p) {
      if (r[p] < cut) continue;
      worst = std::max(worst, (s.Q + hp.at(p)).max_abs());
    }
    return worst;
  }

  double mass(const State& s) const { return integrate(density(s)); }

 private:
  const Grid& grid_;
  const CoefficientSet& coeffs_;
  VectorField xi_;
  SymMatrix A_;
  Vec c_;
  ScalarField U_grid_;
};

}  // namespace

FlowTrajectory zero_viscosity_integrate(const LogDensity& rho0, const Phase& theta0, const CoefficientSet& coeffs,
                                        const std::vector<double>& times, const ZeroViscosityOptions& opt) {
  if (coeffs.sigma != 0.0) throw Error(ErrorKind::InvalidArgument, "zero viscosity integration needs sigma = 0");
  if (!theta0.logs.empty()) throw Error(ErrorKind::InvalidArgument, "initial phase must not carry log terms");
  if (times.size() < 2) throw Error(ErrorKind::TooFewSamples, "need at least 2 sample times");
  const Grid& g = rho0.phi.grid;
  require_same_grid(g, theta0.grid());
  const double floor = kDefaultFloor;

  FlowTrajectory traj;
  traj.grid = g;
  traj.times = times;
  traj.coeffs = coeffs;
  traj.family = Family::ZeroViscosity;
  traj.boundary = Boundary::Initial;

  System sys(g, coeffs, opt);
  State s;
  s.P = rho0.P;
  s.h = rho0.h;
  s.phi = rho0.phi;
  s.Q = theta0.quad;
  s.g = theta0.linear;
  s.psi = theta0.smooth;

  double hmin = g.spacing(0);
  for (int a = 1; a < g.dim; ++a) hmin = std::min(hmin, g.spacing(a));

  auto emit = [&](double t) {
    double mass = sys.mass(s);
    for (double& v : s.phi.values) v -= std::log(mass);
    ScalarField r = sys.density(s);
    Density rho;
    try {
      rho = Density::adopt(r, floor);
    } catch (const Error&) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "density %.3g below floor at t=%.6g", r.min(), t);
      throw Error(ErrorKind::Vacuum, buf);
    }
    Phase th(s.psi);
    th.quad = s.Q;
    th.linear = s.g;
    th.gauge_fix(rho);
    traj.snaps.push_back({rho, th});
  };

  emit(times.front());
  for (std::size_t k = 1; k < times.size(); ++k) {
    double interval = times[k] - times[k - 1];
    double vmax = 0.0;
    sys.rhs(s, &vmax);
    double step = std::min(interval, opt.cfl * hmin / std::max(vmax, 1e-12));
    int nsub = static_cast<int>(std::ceil(interval / step - 1e-12));
    step = interval / nsub;
    for (int j = 0; j < nsub; ++j) {
      double curv = sys.curvature(s);
      if (!std::isfinite(curv) || curv > 1.0 / (10.0 * step)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "max |hess theta| = %.4g exceeds 1/(10 dt) near t=%.6g; truncated", curv,
                      times[k - 1] + j * step);
        traj.log.push_back(buf);
        traj.times.resize(traj.snaps.size());
        throw Error(ErrorKind::ShockImminent, buf);
      }
      State k1 = sys.rhs(s, nullptr);
      State k2 = sys.rhs(axpy(s, 0.5 * step, k1), nullptr);
      State k3 = sys.rhs(axpy(s, 0.5 * step, k2), nullptr);
      State k4 = sys.rhs(axpy(s, step, k3), nullptr);
      State next = axpy(s, step / 6.0, k1);
      next = axpy(next, step / 3.0, k2);
      next = axpy(next, step / 3.0, k3);
      s = axpy(next, step / 6.0, k4);
      double drift = std::fabs(sys.mass(s) - 1.0);
      if (drift > 1e-8) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "renormalized: mass drift %.3g in one step at t=%.6g", drift,
                      times[k - 1] + (j + 1) * step);
        traj.log.push_back(buf);
        double mass = sys.mass(s);
        for (double& v : s.phi.values) v -= std::log(mass);
      }
    }
    emit(times[k]);
  }
  stamp_hypotheses(traj);
  return traj;
}

FlowTrajectory zero_viscosity_integrate(const Density& rho0, const Phase& theta0, const CoefficientSet& coeffs,
                                        const std::vector<double>& times, const ZeroViscosityOptions& opt) {
  return zero_viscosity_integrate(LogDensity::from_density(rho0), theta0, coeffs, times, opt);
}

}  // namespace dflow
