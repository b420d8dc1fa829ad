#include "dflow/trajectory.hpp"

#include "dflow/error.hpp"

namespace dflow {

const char* family_name(Family f) {
  switch (f) {
    case Family::Stationary: return "stationary";
    case Family::Heat: return "heat";
    case Family::ZeroViscosity: return "zero_viscosity";
    case Family::Bridge: return "bridge";
    case Family::Mfg: return "mfg";
  }
  return "stationary";
}

const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::Initial: return "initial";
    case Boundary::Planning: return "planning";
    case Boundary::MeanField: return "mean_field";
  }
  return "initial";
}

Family parse_family(const std::string& s) {
  for (Family f : {Family::Stationary, Family::Heat, Family::ZeroViscosity, Family::Bridge, Family::Mfg})
    if (s == family_name(f)) return f;
  throw Error(ErrorKind::Config, "unknown flow family '" + s + "'");
}

Boundary parse_boundary(const std::string& s) {
  for (Boundary b : {Boundary::Initial, Boundary::Planning, Boundary::MeanField})
    if (s == boundary_name(b)) return b;
  throw Error(ErrorKind::Config, "unknown boundary '" + s + "'");
}

std::vector<std::string> HypothesisStamps::describe() const {
  std::vector<std::string> out;
  if (!stamped) {
    out.push_back("not stamped");
    return out;
  }
  out.push_back(std::string("sigma >= 0: ") + (sigma_nonnegative ? "yes" : "no"));
  out.push_back(std::string("f' >= 0 on density range: ") + (f_nondecreasing ? "yes" : "no"));
  out.push_back(std::string("min eig of integral(hess U - hess W * rho) >= -1e-8: ") +
                (convex_confinement ? "yes" : "no") + " (" + std::to_string(min_convexity_eig) + ")");
  return out;
}

}  // namespace dflow
