#include "dflow/oracles.hpp"

#include <cmath>

#include "dflow/error.hpp"
#include "dflow/matrix_comparison.hpp"

namespace dflow {

GaussianHeatValues gaussian_heat_oracle(const SymMatrix& v0, double sigma, double t) {
  const int n = v0.dim();
  GaussianHeatValues o;
  o.cov = v0 + (sigma * t) * SymMatrix::identity(n);
  o.fisher = sym_inverse(o.cov);
  o.entropy = -0.5 * (n * std::log(2.0 * M_PI * M_E) + log_det(o.cov));
  o.S = (-0.5 * sigma) * o.fisher;
  o.Tplus = SymMatrix(n);
  o.Tminus = (-sigma) * o.fisher;
  return o;
}

DilationValues dilation_oracle(double a, double b, double t) {
  DilationValues d;
  d.std_dev = a + b * t;
  if (!(d.std_dev > 0.0)) throw Error(ErrorKind::InvalidArgument, "dilation collapses before t");
  d.theta_curvature = b / d.std_dev;
  d.S = -b / d.std_dev;
  d.dS = d.S * d.S;
  d.entropy = -0.5 * std::log(2.0 * M_PI * M_E * d.std_dev * d.std_dev);
  return d;
}

FunctionalSeries fine_grid_resolve(const Scenario& sc, int refine_factor) {
  Scenario r = refined_scenario(sc, refine_factor);
  return assemble_series(build_flow(r), r.series);
}

FdSeries fd_derivative(const std::vector<double>& samples, double dt) { return differentiate(samples, dt); }

}  // namespace dflow
