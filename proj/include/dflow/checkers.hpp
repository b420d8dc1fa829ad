#pragma once

#include <cstdint>
#include <vector>

#include "dflow/check_report.hpp"
#include "dflow/flows.hpp"
#include "dflow/functionals.hpp"

namespace dflow {

struct CheckOptions {
  // <= 0 selects the automatic tolerance.
  double tol = 0.0;
  std::uint64_t seed = 1;
  int random_directions = 8;
  int threads = 1;
};

CheckReport check_T_inequality(const FunctionalSeries& series, const CheckOptions& opt = {});
CheckReport check_S_inequality(const FunctionalSeries& series, const CheckOptions& opt = {});
CheckReport check_entropy_growth(const FunctionalSeries& series, const CheckOptions& opt = {});
CheckReport check_turnpike(const FunctionalSeries& series, const CheckOptions& opt = {});
CheckReport check_energy(const FunctionalSeries& series, const CheckOptions& opt = {});
CheckReport check_matrix_energy(const FunctionalSeries& series, const CheckOptions& opt = {});
CheckReport check_cost_identity(const FunctionalSeries& series, const CheckOptions& opt = {});
CheckReport check_cost_inequality(const FunctionalSeries& series, const CheckOptions& opt = {});
CheckReport check_time_symmetry(const FlowTrajectory& traj, const CheckOptions& opt = {});
// Fails when the PDE residuals exceed the family's certified level.
CheckReport check_residual(const FlowTrajectory& traj, const CheckOptions& opt = {});

struct BridgePair {
  Density mu_a, mu_z;
};

struct LongtimeSetup {
  double sigma = 1.0;
  std::vector<double> taus{1.0, 2.0, 4.0};
  int samples = 129;
  double envelope_step = 0.01;  // relative step of the auxiliary bridges
  double envelope_rel = 0.05;
  BridgeOptions bridge;
};

struct LongtimeRow {
  double tau = 0.0;
  SymMatrix O, C, dC_envelope, dC_sweep;
  bool has_sweep = false;
};

CheckReport check_longtime(const BridgePair& pair, const LongtimeSetup& setup, const CheckOptions& opt = {},
                           std::vector<LongtimeRow>* rows = nullptr);

// The heat semigroup P_t used by the entropic cost results has generator (1/2) Laplacian.
struct EviSetup {
  std::vector<double> t_grid{0.0, 0.25};
  double fd_step = 1e-3;
  int samples = 129;
  BridgeOptions bridge;
};

CheckReport check_evi(const BridgePair& pair, const EviSetup& setup, const CheckOptions& opt = {});

struct ContractionSetup {
  double tau_heat = 0.5;
  int n_steps = 6;
  int samples = 129;
  BridgeOptions bridge;
};

CheckReport check_contraction(const BridgePair& pair, const ContractionSetup& setup, const CheckOptions& opt = {});

// Entropic cost C_1 and matrix entropy E_1 of the bridge with tau = 1, sigma = sqrt(2).
struct EntropicCost {
  double C = 0.0;
  SymMatrix C_mat, E_mat;
  double trace_identity_error = 0.0;
  double dE_end = 0.0;  // Tr S(1)
};

EntropicCost entropic_cost(const Density& mu_a, const Density& mu_z, int samples, const BridgeOptions& opt);

// Random orthonormal basis from seeded Gaussian vectors.
std::vector<Vec> random_basis(int n, std::uint64_t seed);

}  // namespace dflow
