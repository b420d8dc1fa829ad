#include <algorithm>
#include <cmath>
#include <numbers>

#include "dflow/error.hpp"
#include "dflow/flows.hpp"
#include "dflow/functionals.hpp"
#include "dflow/matrix_comparison.hpp"
#include "dflow/time_series.hpp"

namespace dflow {

std::vector<double> uniform_times(double tau, int samples) {
  if (samples < 2) throw Error(ErrorKind::TooFewSamples, "need at least 2 samples");
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  std::vector<double> t(samples);
  for (int k = 0; k < samples; ++k) t[k] = tau * k / (samples - 1);
  return t;
}

double window_value(double x, double L, double inner, double outer) {
  double s = (std::fabs(x) - inner * L) / ((outer - inner) * L);
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  return 1.0 - a / (a + b);
}

LogDensity LogDensity::from_density(const Density& rho) {
  LogDensity l;
  l.P = SymMatrix(rho.grid().dim);
  l.h = Vec(rho.grid().dim);
  l.phi = rho.field();
  for (double& v : l.phi.values) v = std::log(v);
  return l;
}

LogDensity LogDensity::gaussian(const Grid& g, const Vec& mean, const SymMatrix& cov) {
  LogDensity l;
  l.P = sym_inverse(cov);
  l.h = l.P.apply(mean);
  double c = -0.5 * l.P.quad(mean) - 0.5 * (g.dim * std::log(2.0 * std::numbers::pi) + log_det(cov));
  l.phi = ScalarField(g, c);
  return l;
}

ScalarField LogDensity::values() const {
  const Grid& g = phi.grid;
  ScalarField out(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    Vec x = g.point(p);
    out[p] = std::exp(-0.5 * P.quad(x) + h.dot(x) + phi[p]);
  }
  return out;
}

FlowTrajectory heat_flow(const Density& rho0, double sigma, const std::vector<double>& times) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "heat flow needs sigma > 0");
  FlowTrajectory traj;
  traj.grid = rho0.grid();
  traj.times = times;
  traj.coeffs.sigma = sigma;
  traj.family = Family::Heat;
  traj.boundary = Boundary::Initial;
  for (double t : times) {
    Density rho;
    try {
      rho = Density::adopt(heat_propagate(rho0.field(), t - times.front(), sigma), rho0.floor());
    } catch (const Error& e) {
      throw Error(ErrorKind::Vacuum, std::string("heat flow: ") + e.what());
    }
    Phase theta = Phase::zero(traj.grid);
    theta.logs.push_back({-0.5 * sigma, rho.field()});
    theta.gauge_fix(rho);
    traj.snaps.push_back({rho, theta});
  }
  stamp_hypotheses(traj);
  return traj;
}

FlowTrajectory reverse_trajectory(const FlowTrajectory& traj) {
  FlowTrajectory out = traj;
  std::size_t m = traj.samples();
  for (std::size_t k = 0; k < m; ++k) {
    out.times[k] = traj.times.front() + (traj.times.back() - traj.times[m - 1 - k]);
    out.snaps[k].rho = traj.snaps[m - 1 - k].rho;
    out.snaps[k].theta = traj.snaps[m - 1 - k].theta.negated();
  }
  out.residual.reset();
  out.log.push_back("time reversed");
  return out;
}

void stamp_hypotheses(FlowTrajectory& traj) {
  HypothesisStamps st;
  st.stamped = true;
  st.sigma_nonnegative = std::isfinite(traj.coeffs.sigma) && traj.coeffs.sigma >= 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& s : traj.snaps) {
    lo = std::min(lo, s.rho.field().min());
    hi = std::max(hi, s.rho.field().max());
  }
  st.f_nondecreasing = true;
  if (!traj.coeffs.f.is_zero()) {
    for (int i = 0; i < 64; ++i) {
      double r = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / 63.0);
      if (!(traj.coeffs.f.fprime(r) >= 0.0)) st.f_nondecreasing = false;
    }
  }
  st.min_convexity_eig = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.snaps)
    st.min_convexity_eig = std::min(st.min_convexity_eig, min_eig(confinement_matrix(s.rho, traj.coeffs)));
  st.convex_confinement = st.min_convexity_eig >= -1e-8;
  traj.stamps = st;
}

Residual pde_residual(const FlowTrajectory& traj, const ResidualOptions& opt) {
  std::size_t m = traj.samples();
  if (m < 5) throw Error(ErrorKind::TooFewSamples, "pde_residual needs at least 5 samples");
  const Grid& g = traj.grid;
  const double dt = (traj.times.back() - traj.times.front()) / static_cast<double>(m - 1);
  const double sigma = traj.coeffs.sigma;
  std::vector<ScalarField> theta(m);
  for (std::size_t k = 0; k < m; ++k) theta[k] = traj.snaps[k].theta.values();
  ScalarField U = traj.coeffs.U.values(g);
  Residual res;
  for (std::size_t k = 2; k + 2 < m; ++k) {
    const Density& rho = traj.snaps[k].rho;
    const Phase& th = traj.snaps[k].theta;
    auto ddt = [&](auto get, std::size_t p) {
      return (get(k - 2, p) - 8.0 * get(k - 1, p) + 8.0 * get(k + 1, p) - get(k + 2, p)) / (12.0 * dt);
    };
    auto rho_at = [&](std::size_t j, std::size_t p) { return traj.snaps[j].rho[p]; };
    auto th_at = [&](std::size_t j, std::size_t p) { return theta[j][p]; };

    VectorField v = th.grad();
    VectorField flux(g);
    for (int a = 0; a < g.dim; ++a)
      for (std::size_t p = 0; p < g.size(); ++p) flux.comp[a][p] = rho[p] * v.comp[a][p];
    ScalarField div = divergence(flux);
    for (std::size_t p = 0; p < g.size(); ++p)
      res.continuity = std::max(res.continuity, std::fabs(ddt(rho_at, p) + div[p]));

    ScalarField bohm = sigma > 0.0 ? bohm_potential(rho) : ScalarField(g);
    ScalarField wr = convolve(traj.coeffs.W, rho);
    double cut = opt.support_rel * rho.field().max();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (rho[p] < cut) continue;
      Vec vp = v.at(p);
      double r = ddt(th_at, p) + 0.5 * vp.dot(vp) + 0.5 * sigma * sigma * bohm[p] + U[p] - wr[p] -
                 traj.coeffs.f.f(rho[p]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (hi >= lo) res.phase = std::max(res.phase, 0.5 * (hi - lo));
  }
  return res;
}

}  // namespace dflow
