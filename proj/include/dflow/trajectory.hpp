#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dflow/coefficients.hpp"
#include "dflow/phase.hpp"

namespace dflow {

enum class Family { Stationary, Heat, ZeroViscosity, Bridge, Mfg };
// What was prescribed: (rho_0, theta_0), (rho_0, rho_tau) or (rho_0, u_tau).
enum class Boundary { Initial, Planning, MeanField };

const char* family_name(Family f);
const char* boundary_name(Boundary b);
Family parse_family(const std::string& s);
Boundary parse_boundary(const std::string& s);

struct Snapshot {
  Density rho;
  Phase theta;
};

struct Residual {
  double continuity = 0.0;
  double phase = 0.0;
};

struct HypothesisStamps {
  bool sigma_nonnegative = false;
  bool f_nondecreasing = false;
  bool convex_confinement = false;
  double min_convexity_eig = 0.0;
  bool stamped = false;

  bool theorem_eligible() const { return stamped && sigma_nonnegative && f_nondecreasing && convex_confinement; }
  std::vector<std::string> describe() const;
};

struct FlowTrajectory {
  Grid grid;
  std::vector<double> times;
  std::vector<Snapshot> snaps;
  CoefficientSet coeffs;
  Family family = Family::Stationary;
  Boundary boundary = Boundary::Initial;
  std::optional<Residual> residual;
  HypothesisStamps stamps;
  std::vector<std::string> log;

  double tau() const { return times.back() - times.front(); }
  std::size_t samples() const { return times.size(); }
};

}  // namespace dflow
