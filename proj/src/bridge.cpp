#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dflow/error.hpp"
#include "dflow/flows.hpp"

namespace dflow {

namespace {

// log of the periodic heat semigroup applied to exp(l), one axis at a time.
ScalarField log_heat(const ScalarField& l, double t, double sigma) {
  if (t == 0.0) return l;
  const Grid& g = l.grid;
  ScalarField cur = l;
  std::size_t stride = 1;
  for (int a = g.dim - 1; a >= 0; --a) {
    const int n = g.points[a];
    const double h = g.spacing(a), L = g.extent[a], var = sigma * t;
    std::vector<double> lk(n);
    double kmax = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < n; ++d) {
      double x = d * h;
      double best = -std::numeric_limits<double>::infinity();
      for (int m = -3; m <= 3; ++m) best = std::max(best, -std::pow(x + m * L, 2) / (2.0 * var));
      double s = 0.0;
      for (int m = -3; m <= 3; ++m) s += std::exp(-std::pow(x + m * L, 2) / (2.0 * var) - best);
      lk[d] = best + std::log(s);
      kmax = std::max(kmax, lk[d]);
    }
    double norm = 0.0;
    for (double v : lk) norm += std::exp(v - kmax);
    double lnorm = kmax + std::log(norm);
    for (double& v : lk) v -= lnorm;

    ScalarField next(g);
    std::vector<double> line(n);
    const std::size_t total = g.size();
    for (std::size_t base = 0; base < total; ++base) {
      if ((base / stride) % n != 0) continue;
      for (int j = 0; j < n; ++j) line[j] = cur[base + j * stride];
      for (int i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) best = std::max(best, lk[(i - j + n) % n] + line[j]);
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += std::exp(lk[(i - j + n) % n] + line[j] - best);
        next[base + i * stride] = best + std::log(s);
      }
    }
    cur = std::move(next);
    stride *= n;
  }
  return cur;
}

double dynamic_range(const ScalarField& f) {
  double lo = f.min(), hi = f.max();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

ScalarField log_of(const ScalarField& f) {
  ScalarField out = f;
  for (double& v : out.values) v = std::log(v);
  return out;
}

double rel_mismatch(const ScalarField& a, const ScalarField& b) {
  double e = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) e = std::max(e, std::fabs(a[p] / b[p] - 1.0));
  return e;
}

double log_mismatch(const ScalarField& la, const ScalarField& lb) {
  double e = 0.0;
  for (std::size_t p = 0; p < la.size(); ++p) e = std::max(e, std::fabs(std::expm1(la[p] - lb[p])));
  return e;
}

ScalarField exp_shifted(const ScalarField& l) {
  double m = l.max();
  ScalarField out = l;
  for (double& v : out.values) v = std::exp(v - m);
  return out;
}

}  // namespace

FlowTrajectory schrodinger_bridge(const Density& mu_a, const Density& mu_z, double sigma, const std::vector<double>& times,
                                  const BridgeOptions& opt, BridgeInfo* info) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "bridge needs sigma > 0");
  require_same_grid(mu_a.grid(), mu_z.grid());
  if (times.size() < 2) throw Error(ErrorKind::TooFewSamples, "need at least 2 sample times");
  const Grid& g = mu_a.grid();
  const double tau = times.back() - times.front();
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "bridge horizon must be positive");

  FlowTrajectory traj;
  traj.grid = g;
  traj.times = times;
  traj.coeffs.sigma = sigma;
  traj.family = Family::Bridge;
  traj.boundary = Boundary::Planning;

  const ScalarField& ma = mu_a.field();
  const ScalarField& mz = mu_z.field();
  ScalarField a(g, 1.0), b(g, 1.0);
  bool log_domain = opt.force_log_domain;
  int it = 0;
  double err = std::numeric_limits<double>::infinity();

  if (!log_domain) {
    for (; it < opt.max_iter; ++it) {
      ScalarField pb = heat_propagate(b, tau, sigma);
      if (!(pb.min() > 0.0)) {
        log_domain = true;
        break;
      }
      for (std::size_t p = 0; p < a.size(); ++p) a[p] = ma[p] / pb[p];
      ScalarField pa = heat_propagate(a, tau, sigma);
      if (!(pa.min() > 0.0)) {
        log_domain = true;
        break;
      }
      for (std::size_t p = 0; p < b.size(); ++p) b[p] = mz[p] / pa[p];
      if (dynamic_range(a) > opt.log_domain_range || dynamic_range(b) > opt.log_domain_range) {
        log_domain = true;
        break;
      }
      ScalarField r0 = heat_propagate(b, tau, sigma);
      for (std::size_t p = 0; p < r0.size(); ++p) r0[p] *= a[p];
      err = rel_mismatch(r0, ma);
      if (!std::isfinite(err)) throw Error(ErrorKind::SinkhornDiverged, "non-finite marginal error");
      if (err <= opt.sinkhorn_tol) break;
    }
  }

  ScalarField la, lb;
  if (log_domain) {
    traj.log.push_back("sinkhorn switched to log domain after " + std::to_string(it) + " iterations");
    ScalarField lma = log_of(ma), lmz = log_of(mz);
    lb = (it > 0 && b.min() > 0.0) ? log_of(b) : ScalarField(g, 0.0);
    la = ScalarField(g);
    for (; it < opt.max_iter; ++it) {
      ScalarField pb = log_heat(lb, tau, sigma);
      for (std::size_t p = 0; p < la.size(); ++p) la[p] = lma[p] - pb[p];
      ScalarField pa = log_heat(la, tau, sigma);
      for (std::size_t p = 0; p < lb.size(); ++p) lb[p] = lmz[p] - pa[p];
      ScalarField r0 = log_heat(lb, tau, sigma);
      for (std::size_t p = 0; p < r0.size(); ++p) r0[p] += la[p];
      err = log_mismatch(r0, lma);
      if (!std::isfinite(err)) throw Error(ErrorKind::DegenerateMarginals, "non-finite log potentials");
      if (err <= opt.sinkhorn_tol) break;
    }
  }
  if (!(err <= opt.sinkhorn_tol)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "marginal error %.3g after %d iterations", err, it);
    throw Error(ErrorKind::SinkhornDiverged, buf);
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "sinkhorn converged: %d iterations, marginal error %.3g%s", it + 1, err,
                log_domain ? " (log domain)" : "");
  traj.log.push_back(buf);
  if (info) {
    info->iterations = it + 1;
    info->marginal_error = err;
    info->log_domain = log_domain;
  }

  for (double t : times) {
    double s = t - times.front();
    ScalarField alpha, beta;
    if (!log_domain) {
      alpha = heat_propagate(a, s, sigma);
      beta = heat_propagate(b, tau - s, sigma);
    }
    if (log_domain || !(alpha.min() > 0.0) || !(beta.min() > 0.0)) {
      ScalarField lal = log_domain ? la : log_of(a), lbe = log_domain ? lb : log_of(b);
      alpha = exp_shifted(log_heat(lal, s, sigma));
      beta = exp_shifted(log_heat(lbe, tau - s, sigma));
    }
    if (!(alpha.min() > 0.0) || !(beta.min() > 0.0))
      throw Error(ErrorKind::DegenerateMarginals, "potential underflow at t=" + std::to_string(t));
    ScalarField r(g);
    for (std::size_t p = 0; p < r.size(); ++p) r[p] = alpha[p] * beta[p];
    double mass = integrate(r);
    for (double& v : r.values) v /= mass;
    Density rho;
    try {
      rho = Density::adopt(r, std::min(mu_a.floor(), mu_z.floor()));
    } catch (const Error& e) {
      throw Error(ErrorKind::DegenerateMarginals, e.what());
    }
    // theta = (sigma/2)(log beta - log alpha); rho ~ alpha beta lets the
    // potential propagated over the shorter time be eliminated.
    Phase th = Phase::zero(g);
    if (2.0 * s <= tau) {
      th.logs.push_back({sigma, beta});
      th.logs.push_back({-0.5 * sigma, rho.field()});
    } else {
      th.logs.push_back({0.5 * sigma, rho.field()});
      th.logs.push_back({-sigma, alpha});
    }
    th.gauge_fix(rho);
    traj.snaps.push_back({rho, th});
  }
  stamp_hypotheses(traj);
  return traj;
}

}  // namespace dflow
