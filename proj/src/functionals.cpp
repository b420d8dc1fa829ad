#include "dflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

#include "dflow/error.hpp"
#include "dflow/time_series.hpp"

namespace dflow {

namespace {

struct DensityCalc {
  const Density& rho;
  VectorField grad;
  SymField hess;

  explicit DensityCalc(const Density& r) : rho(r), grad(gradient(r.field())), hess(hessian(r.field())) {}

  Vec grad_log(std::size_t p) const { return (1.0 / rho[p]) * grad.at(p); }
  SymMatrix hess_log(std::size_t p) const {
    Vec gl = grad_log(p);
    return (1.0 / rho[p]) * hess.at(p) - SymMatrix::outer(gl);
  }
};

double scale_of(const SymMatrix& a) { return 1.0 + a.max_abs(); }

void check_forms(double disc, const SymMatrix& value, double tol, const char* what) {
  if (tol > 0.0 && disc > tol * scale_of(value))
    throw Error(ErrorKind::FormsDisagree, std::string(what) + " forms differ by " + std::to_string(disc));
}

}  // namespace

double entropy(const Density& rho) {
  double s = 0.0;
  for (std::size_t p = 0; p < rho.size(); ++p) {
    if (!(rho[p] > 0.0)) throw Error(ErrorKind::PositivityFloor, "entropy of non-positive density");
    s += rho[p] * std::log(rho[p]);
  }
  return s * rho.grid().cell_volume();
}

SymMatrix fisher_matrix(const Density& rho, double* discrepancy, double tol) {
  int n = rho.grid().dim;
  double h = rho.grid().cell_volume();
  VectorField gr = gradient(rho.field());
  SymMatrix I(n);
  for (std::size_t p = 0; p < rho.size(); ++p) {
    Vec g = gr.at(p);
    I += (1.0 / rho[p]) * SymMatrix::outer(g);
  }
  I *= h;
  if (discrepancy) {
    DensityCalc dc(rho);
    SymMatrix alt(n);
    for (std::size_t p = 0; p < rho.size(); ++p) alt -= rho[p] * dc.hess_log(p);
    alt *= h;
    *discrepancy = max_abs_diff(I, alt);
    check_forms(*discrepancy, I, tol, "fisher");
  }
  return I;
}

SymMatrix entropy_production_matrix(const Density& rho, const Phase& theta, double* discrepancy, double tol) {
  require_same_grid(rho.grid(), theta.grid());
  int n = rho.grid().dim;
  double h = rho.grid().cell_volume();
  VectorField gr = gradient(rho.field());
  VectorField gt = theta.grad();
  SymMatrix S(n);
  for (std::size_t p = 0; p < rho.size(); ++p) S += SymMatrix::sym_outer(gr.at(p), gt.at(p));
  S *= h;
  if (discrepancy) {
    SymField ht = theta.hess();
    SymMatrix alt = integrate_tensor(ht, rho);
    alt *= -1.0;
    *discrepancy = max_abs_diff(S, alt);
    check_forms(*discrepancy, S, tol, "entropy production");
  }
  return S;
}

SymMatrix velocity_second_moment(const Density& rho, const Phase& theta) {
  require_same_grid(rho.grid(), theta.grid());
  VectorField gt = theta.grad();
  SymMatrix V(rho.grid().dim);
  for (std::size_t p = 0; p < rho.size(); ++p) V += rho[p] * SymMatrix::outer(gt.at(p));
  return rho.grid().cell_volume() * V;
}

std::pair<SymMatrix, SymMatrix> t_matrices(const SymMatrix& S, const SymMatrix& I, double sigma) {
  if (sigma < 0.0) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
  return {S + (0.5 * sigma) * I, S - (0.5 * sigma) * I};
}

SymMatrix confinement_matrix(const Density& rho, const CoefficientSet& coeffs) {
  const Grid& g = rho.grid();
  SymMatrix m(g.dim);
  if (coeffs.U.kind == Potential::Kind::Quadratic) {
    m += coeffs.U.A;
  } else if (coeffs.U.kind == Potential::Kind::Gridded) {
    m += integrate_tensor(coeffs.U.hess(g), rho);
  }
  if (!coeffs.W.is_zero()) m += integrate_tensor(neg_hess_convolve(coeffs.W, rho), rho);
  return m;
}

SymMatrix remainder_matrix(const Density& rho, const CoefficientSet& coeffs) {
  SymMatrix m = confinement_matrix(rho, coeffs);
  if (!coeffs.f.is_zero()) {
    VectorField gr = gradient(rho.field());
    SymMatrix acc(rho.grid().dim);
    for (std::size_t p = 0; p < rho.size(); ++p) acc += coeffs.f.fprime(rho[p]) * SymMatrix::outer(gr.at(p));
    m += rho.grid().cell_volume() * acc;
  }
  return m;
}

double scalar_energy(const Density& rho, const Phase& theta, const CoefficientSet& coeffs, double sigma) {
  if (!coeffs.W.is_zero()) throw Error(ErrorKind::InvalidArgument, "scalar energy needs W = 0");
  SymMatrix V = velocity_second_moment(rho, theta);
  SymMatrix I = fisher_matrix(rho);
  double u = integrate_against(coeffs.U.values(rho.grid()), rho);
  double F = 0.0;
  for (std::size_t p = 0; p < rho.size(); ++p) F += coeffs.f.F(rho[p]) * rho[p];
  F *= rho.grid().cell_volume();
  return 0.5 * V.trace() + u - sigma * sigma / 8.0 * I.trace() - F;
}

SymMatrix matrix_energy(const SymMatrix& V, const SymMatrix& I, double sigma) {
  return 0.5 * V - (sigma * sigma / 8.0) * I;
}

SeriesRecord snapshot_record(const Snapshot& s, const CoefficientSet& coeffs, double t) {
  const Density& rho = s.rho;
  const Grid& g = rho.grid();
  require_same_grid(g, s.theta.grid());
  const int n = g.dim;
  const double h = g.cell_volume();
  const double sigma = coeffs.sigma;
  DensityCalc dc(rho);
  VectorField gt = s.theta.grad();
  SymField ht = s.theta.hess();

  SeriesRecord r;
  r.t = t;
  r.E = entropy(rho);
  SymMatrix I(n), I_alt(n), S(n), S_alt(n), V(n), quad(n), dI(n);
  for (std::size_t p = 0; p < rho.size(); ++p) {
    double w = rho[p];
    Vec gl = dc.grad_log(p);
    SymMatrix hl = dc.hess_log(p);
    Vec v = gt.at(p);
    SymMatrix hv = ht.at(p);
    I += w * SymMatrix::outer(gl);
    I_alt -= w * hl;
    S += SymMatrix::sym_outer(dc.grad.at(p), v);
    S_alt -= w * hv;
    V += w * SymMatrix::outer(v);
    quad += w * (hv.square() + (sigma * sigma / 4.0) * hl.square());
    dI += (2.0 * w) * hv.sym_product(hl);
  }
  r.I = h * I;
  r.S = h * S;
  r.V = h * V;
  r.fisher_discrepancy = max_abs_diff(r.I, h * I_alt);
  r.sprod_discrepancy = max_abs_diff(r.S, h * S_alt);
  auto tm = t_matrices(r.S, r.I, sigma);
  r.Tplus = tm.first;
  r.Tminus = tm.second;
  r.remainder = remainder_matrix(rho, coeffs);
  r.dS_rhs = h * quad + r.remainder;
  r.dI_rhs = h * dI;
  r.Emat = SymMatrix(n);

  ScalarField U = coeffs.U.values(g);
  r.U_int = integrate_against(U, rho);
  double F = 0.0;
  for (std::size_t p = 0; p < rho.size(); ++p) F += coeffs.f.F(rho[p]) * rho[p];
  r.F_int = F * h;
  r.O = coeffs.W.is_zero() ? 0.5 * r.V.trace() + r.U_int - sigma * sigma / 8.0 * r.I.trace() - r.F_int
                           : std::numeric_limits<double>::quiet_NaN();

  r.dV_coupling = SymMatrix(n);
  if (!coeffs.entropic()) {
    ScalarField wr = convolve(coeffs.W, rho);
    ScalarField c(g);
    for (std::size_t p = 0; p < rho.size(); ++p) c[p] = U[p] - wr[p] - coeffs.f.f(rho[p]);
    for (int j = 0; j < n; ++j) {
      ScalarField flux(g);
      for (std::size_t p = 0; p < rho.size(); ++p) flux[p] = rho[p] * gt.comp[j][p];
      VectorField df = gradient(flux);
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t p = 0; p < rho.size(); ++p) acc += c[p] * df.comp[i][p];
        acc *= h;
        // d_i[rho d_j theta] + d_j[rho d_i theta], accumulated over (i,j) and (j,i)
        r.dV_coupling.at(std::min(i, j), std::max(i, j)) += (i == j ? 2.0 : 1.0) * acc;
      }
    }
  }
  r.seam = seam_mass(rho);
  r.tail = spectral_tail_fraction(rho.field());
  return r;
}

std::vector<double> FunctionalSeries::times() const {
  std::vector<double> t;
  for (const auto& r : rec) t.push_back(r.t);
  return t;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
  return s;
}

SymMatrix trapezoid(const std::vector<double>& t, const std::vector<SymMatrix>& f) {
  SymMatrix s(f.front().dim());
  for (std::size_t k = 1; k < t.size(); ++k) s += (0.5 * (t[k] - t[k - 1])) * (f[k] + f[k - 1]);
  return s;
}

FunctionalSeries assemble_series(const FlowTrajectory& traj, const SeriesOptions& opt) {
  if (traj.samples() < 9) throw Error(ErrorKind::TooFewSamples, "series needs at least 9 samples");
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    const Density& rho = traj.snaps[k].rho;
    if (!rho.field().finite() || !traj.snaps[k].theta.smooth.finite())
      throw Error(ErrorKind::InvalidArgument, "snapshot " + std::to_string(k) + " is not finite");
    if (rho.field().min() < rho.floor())
      throw Error(ErrorKind::PositivityFloor, "snapshot " + std::to_string(k) + " below floor");
  }
  FunctionalSeries s;
  s.dim = traj.grid.dim;
  s.sigma = traj.coeffs.sigma;
  s.family = traj.family;
  s.boundary = traj.boundary;
  s.stamps = traj.stamps;
  s.entropic = traj.coeffs.entropic();
  s.interaction_free = traj.coeffs.W.is_zero();
  s.energy_setting = traj.coeffs.sigma > 0.0 && traj.coeffs.W.is_zero();
  s.rec.resize(traj.samples());

  int threads = std::max(1, opt.threads);
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t k = begin; k < traj.samples(); k += step)
      s.rec[k] = snapshot_record(traj.snaps[k], traj.coeffs, traj.times[k]);
  };
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(work, static_cast<std::size_t>(i), threads);
    for (auto& th : pool) th.join();
  }

  for (std::size_t k = 1; k < s.rec.size(); ++k)
    s.rec[k].Emat = s.rec[k - 1].Emat + (0.5 * (s.rec[k].t - s.rec[k - 1].t)) * (s.rec[k].S + s.rec[k - 1].S);
  // Euler-Maclaurin endpoint correction.
  if (s.rec.size() >= 5) {
    std::vector<SymMatrix> Sv;
    for (const auto& r : s.rec) Sv.push_back(r.S);
    const double dt = s.rec[1].t - s.rec[0].t;
    auto dS = differentiate(Sv, dt).value;
    for (std::size_t k = 1; k < s.rec.size(); ++k) s.rec[k].Emat -= (dt * dt / 12.0) * (dS[k] - dS[0]);
  }

  double worst_f = 0.0, worst_s = 0.0, worst_seam = 0.0;
  for (const auto& r : s.rec) {
    worst_f = std::max(worst_f, r.fisher_discrepancy / scale_of(r.I));
    worst_s = std::max(worst_s, r.sprod_discrepancy / scale_of(r.S));
    worst_seam = std::max(worst_seam, r.seam);
  }
  char buf[160];
  if (worst_f > opt.form_tol) {
    s.under_resolved = true;
    std::snprintf(buf, sizeof buf, "under-resolved: fisher forms differ by %.3g", worst_f);
    s.notes.push_back(buf);
  }
  if (worst_s > opt.form_tol) {
    s.under_resolved = true;
    std::snprintf(buf, sizeof buf, "under-resolved: entropy production forms differ by %.3g", worst_s);
    s.notes.push_back(buf);
  }
  if (worst_seam > opt.seam_tol) {
    std::snprintf(buf, sizeof buf, "seam mass %.3g exceeds monitor %.3g", worst_seam, opt.seam_tol);
    s.notes.push_back(buf);
  }
  return s;
}

CostResult cost_accumulate(const FunctionalSeries& series, double sigma) {
  std::vector<double> t = series.times(), c, fu;
  std::vector<SymMatrix> m;
  for (const auto& r : series.rec) {
    c.push_back(0.5 * r.V.trace() - r.U_int + sigma * sigma / 8.0 * r.I.trace() + r.F_int);
    m.push_back(0.5 * r.V + (sigma * sigma / 8.0) * r.I);
    fu.push_back(r.F_int - r.U_int);
  }
  CostResult out;
  out.C_tau = trapezoid(t, c);
  out.C_mat = trapezoid(t, m);
  out.F_minus_U = trapezoid(t, fu);
  return out;
}

}  // namespace dflow
