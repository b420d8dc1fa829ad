#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dflow/check_report.hpp"
#include "dflow/checkers.hpp"
#include "dflow/flows.hpp"
#include "dflow/functionals.hpp"

namespace dflow {

struct CheckerSpec {
  std::string name;
  double tol = 0.0;
  nlohmann::json params;  // checker-specific keys besides name and tol
};

struct FaultFlags {
  bool theta_sign_flip = false;
  bool theta_perturb = false;
};

struct Scenario {
  std::string name;
  std::string base_dir;  // resolves relative file descriptors
  Grid grid;
  Family family = Family::Stationary;
  nlohmann::json rho0, rho1, theta0, u_tau;
  CoefficientSet coeffs;
  double tau = 1.0;
  int samples = 64;
  std::vector<CheckerSpec> checkers;
  std::uint64_t seed = 1;
  std::string output;
  SeriesOptions series;
  BridgeOptions bridge;
  MfgOptions mfg;
  ZeroViscosityOptions zv;
  FaultFlags faults;

  nlohmann::json source;  // the parsed document, kept for sweeps
};

// Strict parse: unknown keys and out-of-range parameters raise ErrorKind::Config.
Scenario parse_scenario(const nlohmann::json& doc, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

Density build_density(const nlohmann::json& desc, const Grid& g, const std::string& base_dir);
Phase build_phase(const nlohmann::json& desc, const Grid& g);
// Periodic image sum of a Gaussian, normalised on the grid.
Density periodized_gaussian(const Grid& g, const Vec& mean, const SymMatrix& cov);

// Constructs the flow, applies fault flags and records the PDE residual.
FlowTrajectory build_flow(const Scenario& sc);

std::vector<CheckReport> run_checkers(const Scenario& sc, const FlowTrajectory& traj, const FunctionalSeries& series,
                                      int threads);

// Space and time refined copy with 10x tighter solver tolerances.
Scenario refined_scenario(const Scenario& sc, int factor);

}  // namespace dflow
