#pragma once

#include <vector>

#include "dflow/functionals.hpp"
#include "dflow/scenario.hpp"
#include "dflow/time_series.hpp"

namespace dflow {

// Heat flow with generator (sigma/2) Laplacian started from N(m, v0).
struct GaussianHeatValues {
  SymMatrix cov, fisher, S, Tplus, Tminus;
  double entropy = 0.0;
};

GaussianHeatValues gaussian_heat_oracle(const SymMatrix& v0, double sigma, double t);

// 1D pressureless dilation: standard deviation a + b t, theta = b x^2 / (2 (a + b t)).
struct DilationValues {
  double std_dev = 0.0;
  double theta_curvature = 0.0;
  double S = 0.0;
  double dS = 0.0;
  double entropy = 0.0;
};

DilationValues dilation_oracle(double a, double b, double t);

// Re-runs the scenario at refine_factor times the resolution in space and time.
FunctionalSeries fine_grid_resolve(const Scenario& sc, int refine_factor);

// Fourth-order central differences, one-sided at the ends, with error estimates.
FdSeries fd_derivative(const std::vector<double>& samples, double dt);

}  // namespace dflow
