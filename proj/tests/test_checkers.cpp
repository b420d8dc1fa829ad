#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "dflow/checkers.hpp"
#include "dflow/error.hpp"
#include "dflow/scenario.hpp"
#include "oracles_support.hpp"

using namespace dflow;

namespace {

std::string scenario_path(const std::string& name) { return std::string(DFLOW_SCENARIO_DIR) + "/" + name + ".json"; }

struct Built {
  Scenario sc;
  FlowTrajectory tr;
  FunctionalSeries s;
};

Built build(const std::string& name) {
  Built b;
  b.sc = load_scenario(scenario_path(name));
  b.tr = build_flow(b.sc);
  b.s = assemble_series(b.tr, b.sc.series);
  return b;
}

const CheckPart* part(const CheckReport& r, const std::string& name) {
  for (const auto& p : r.parts)
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace

TEST(Checkers, HeatFlowSaturatesForwardInequality) {
  Built b = build("heat_gaussian");
  double worst = 0.0;
  for (const auto& r : b.s.rec) worst = std::max(worst, r.Tplus.max_abs());
  EXPECT_LT(worst, 1e-6);
  CheckReport t = check_T_inequality(b.s);
  EXPECT_TRUE(t.pass);
  EXPECT_TRUE(check_S_inequality(b.s).pass);
}

TEST(Checkers, HeatEntropyGrowthSlackIsAnalytic) {
  Built b = build("heat_gaussian");
  const double v0 = 1.0, sigma = 1.0, tau = 0.5;
  double actual = -0.5 * std::log(1.0 + sigma * tau / v0);
  double bound = -std::log(1.0 + sigma * tau / (2.0 * v0));
  EXPECT_NEAR(b.s.rec.back().E - b.s.rec.front().E, actual, 1e-6);
  CheckReport r = check_entropy_growth(b.s);
  ASSERT_TRUE(r.pass);
  const CheckPart* lower = part(r, "lower");
  ASSERT_NE(lower, nullptr);
  EXPECT_NEAR(lower->margin, actual - bound, 1e-6);
  EXPECT_EQ(part(r, "upper"), nullptr);
}

TEST(Checkers, HeatCostIdentityAndEnergy) {
  Built b = build("heat_gaussian");
  EXPECT_TRUE(check_energy(b.s).pass);
  EXPECT_TRUE(check_matrix_energy(b.s).pass);
  EXPECT_TRUE(check_cost_identity(b.s).pass);
  EXPECT_TRUE(check_cost_inequality(b.s).pass);
  EXPECT_TRUE(check_turnpike(b.s).pass);
}

TEST(Checkers, BridgeTwoSidedEntropyBracket) {
  Built b = build("bridge_symmetric");
  CheckReport r = check_entropy_growth(b.s);
  EXPECT_TRUE(r.pass);
  EXPECT_NE(part(r, "lower"), nullptr);
  EXPECT_NE(part(r, "upper"), nullptr);
}

TEST(Checkers, BridgeTimeSymmetryAndResidual) {
  Built b = build("bridge_gaussian");
  EXPECT_TRUE(check_time_symmetry(b.tr).pass);
  EXPECT_TRUE(check_residual(b.tr).pass);
}

TEST(Checkers, TurnpikeRefusesZeroViscosity) {
  Built b = build("dilation");
  CheckReport r = check_turnpike(b.s);
  EXPECT_FALSE(r.hypotheses_ok);
  EXPECT_FALSE(r.pass);
}

TEST(Checkers, EnergyRefusesInteraction) {
  Built b = build("guard_interaction");
  for (const auto& r : {check_energy(b.s), check_cost_identity(b.s)}) {
    EXPECT_FALSE(r.hypotheses_ok);
    EXPECT_FALSE(r.pass);
  }
}

TEST(Checkers, SignFlipIsDetected) {
  Built b = build("fault_sign_flip");
  CheckReport r = check_T_inequality(b.s);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.witness.label.empty());
}

TEST(Checkers, PerturbedPhaseBreaksResidual) {
  Built b = build("fault_theta_perturb");
  CheckReport r = check_residual(b.tr);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.witness.label, "phase");
}

TEST(Checkers, SeededDirectionsAreReproducible) {
  Built b = build("bridge_spread");
  CheckOptions o;
  o.seed = 42;
  CheckReport a = check_S_inequality(b.s, o), c = check_S_inequality(b.s, o);
  EXPECT_EQ(a.seed, 42u);
  EXPECT_EQ(a.worst_margin, c.worst_margin);
  EXPECT_EQ(a.witness.direction, c.witness.direction);
}

TEST(Checkers, UserToleranceIsRespected) {
  Built b = build("bridge_gaussian");
  CheckOptions o;
  o.tol = 1e-12;
  CheckReport strict = check_T_inequality(b.s, o);
  EXPECT_DOUBLE_EQ(strict.tolerance, 1e-12);
  EXPECT_FALSE(strict.pass);
}

TEST(Checkers, TooFewSamplesAreRefused) {
  Built b = build("heat_gaussian");
  b.s.rec.resize(3);
  CheckReport r = check_T_inequality(b.s);
  EXPECT_FALSE(r.hypotheses_ok);
  EXPECT_FALSE(r.pass);
}

TEST(Checkers, RandomBasisIsOrthonormal) {
  auto B = random_basis(3, 11);
  ASSERT_EQ(B.size(), 3u);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(B[i].dot(B[j]), i == j ? 1.0 : 0.0, 1e-12);
}
