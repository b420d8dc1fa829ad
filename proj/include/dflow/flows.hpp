#pragma once

#include <cstdint>
#include <vector>

#include "dflow/trajectory.hpp"

namespace dflow {

std::vector<double> uniform_times(double tau, int samples);

// rho = exp(-1/2 <x, P x> + <h, x> + phi) with phi periodic. Gaussian data gets
// its precision as envelope so that phi stays smooth; other data uses P = 0.
struct LogDensity {
  SymMatrix P;
  Vec h;
  ScalarField phi;

  static LogDensity from_density(const Density& rho);
  static LogDensity gaussian(const Grid& g, const Vec& mean, const SymMatrix& cov);
  ScalarField values() const;
};

FlowTrajectory heat_flow(const Density& rho0, double sigma, const std::vector<double>& times);

struct ZeroViscosityOptions {
  double cfl = 0.5;
  // The affine advecting field is cut off by window_value(x, L, inner, outer).
  double window_inner = 0.38;
  double window_outer = 0.48;
};

FlowTrajectory zero_viscosity_integrate(const LogDensity& rho0, const Phase& theta0, const CoefficientSet& coeffs,
                                        const std::vector<double>& times, const ZeroViscosityOptions& opt = {});
FlowTrajectory zero_viscosity_integrate(const Density& rho0, const Phase& theta0, const CoefficientSet& coeffs,
                                        const std::vector<double>& times, const ZeroViscosityOptions& opt = {});

struct BridgeOptions {
  double sinkhorn_tol = 1e-11;
  int max_iter = 5000;
  double log_domain_range = 1e12;
  bool force_log_domain = false;
};

struct BridgeInfo {
  int iterations = 0;
  double marginal_error = 0.0;
  bool log_domain = false;
};

FlowTrajectory schrodinger_bridge(const Density& mu_a, const Density& mu_z, double sigma, const std::vector<double>& times,
                                  const BridgeOptions& opt = {}, BridgeInfo* info = nullptr);

struct MfgOptions {
  double damping = 0.5;
  double fp_tol = 1e-9;
  int max_rounds = 200;
  double max_step = 0.01;
  double cfl = 0.4;
  double window_inner = 0.38;
  double window_outer = 0.48;
};

struct MfgInfo {
  int rounds = 0;
  double last_difference = 0.0;
  std::vector<double> contraction;
};

// u_tau carries its own periodic, quadratic and linear parts (no log terms).
FlowTrajectory mfg_picard(const Density& rho0, const Phase& u_tau, const CoefficientSet& coeffs,
                          const std::vector<double>& times, const MfgOptions& opt = {}, MfgInfo* info = nullptr);

FlowTrajectory reverse_trajectory(const FlowTrajectory& traj);

struct ResidualOptions {
  // Phase residual is taken where rho >= support_rel * max rho.
  double support_rel = 1e-4;
};

Residual pde_residual(const FlowTrajectory& traj, const ResidualOptions& opt = {});

void stamp_hypotheses(FlowTrajectory& traj);

// Smooth periodic window: 1 for |x| <= inner*L, 0 for |x| >= outer*L.
double window_value(double x, double L, double inner, double outer);

}  // namespace dflow
