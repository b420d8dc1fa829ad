#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dflow/trajectory.hpp"

namespace dflow {

double entropy(const Density& rho);

// Canonical outer-product forms. When `discrepancy` is given the alternate
// Hessian form is evaluated too and the max entry difference written there.
// A positive `tol` turns a larger difference into a FormsDisagree error.
SymMatrix fisher_matrix(const Density& rho, double* discrepancy = nullptr, double tol = 0.0);
SymMatrix entropy_production_matrix(const Density& rho, const Phase& theta, double* discrepancy = nullptr,
                                    double tol = 0.0);
SymMatrix velocity_second_moment(const Density& rho, const Phase& theta);
std::pair<SymMatrix, SymMatrix> t_matrices(const SymMatrix& S, const SymMatrix& I, double sigma);
SymMatrix remainder_matrix(const Density& rho, const CoefficientSet& coeffs);
// integral of hess U - hess W * rho against rho.
SymMatrix confinement_matrix(const Density& rho, const CoefficientSet& coeffs);
double scalar_energy(const Density& rho, const Phase& theta, const CoefficientSet& coeffs, double sigma);
SymMatrix matrix_energy(const SymMatrix& V, const SymMatrix& I, double sigma);

struct SeriesRecord {
  double t = 0.0;
  double E = 0.0;
  double O = 0.0;  // NaN when W != 0
  SymMatrix S, I, V, Tplus, Tminus, Emat, remainder;
  // Right-hand sides of the first-derivative formulas.
  SymMatrix dS_rhs, dI_rhs, dV_coupling;
  double U_int = 0.0;  // integral U drho
  double F_int = 0.0;  // integral F(rho) drho
  double fisher_discrepancy = 0.0;
  double sprod_discrepancy = 0.0;
  double seam = 0.0;
  double tail = 0.0;
};

struct FunctionalSeries {
  int dim = 1;
  double sigma = 0.0;
  Family family = Family::Stationary;
  Boundary boundary = Boundary::Initial;
  HypothesisStamps stamps;
  bool entropic = true;       // U = W = f = 0
  bool energy_setting = false;  // sigma > 0 and W = 0 (U is static by construction)
  bool interaction_free = true;
  std::vector<SeriesRecord> rec;
  bool under_resolved = false;
  std::vector<std::string> notes;

  std::size_t size() const { return rec.size(); }
  double tau() const { return rec.back().t - rec.front().t; }
  std::vector<double> times() const;
  double dt() const { return rec[1].t - rec[0].t; }
};

struct SeriesOptions {
  int threads = 1;
  double form_tol = 1e-6;
  double seam_tol = 1e-8;
};

SeriesRecord snapshot_record(const Snapshot& s, const CoefficientSet& coeffs, double t);
FunctionalSeries assemble_series(const FlowTrajectory& traj, const SeriesOptions& opt = {});

struct CostResult {
  double C_tau = 0.0;
  SymMatrix C_mat;
  double F_minus_U = 0.0;  // double integral of F(rho) - U
};

CostResult cost_accumulate(const FunctionalSeries& series, double sigma);

// Composite trapezoid over the series times.
double trapezoid(const std::vector<double>& t, const std::vector<double>& f);
SymMatrix trapezoid(const std::vector<double>& t, const std::vector<SymMatrix>& f);

}  // namespace dflow
