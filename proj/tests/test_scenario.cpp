#include <gtest/gtest.h>

#include <string>

#include "dflow/error.hpp"
#include "dflow/scenario.hpp"
#include "oracles_support.hpp"

using namespace dflow;
using nlohmann::json;

namespace {

json heat_doc() {
  return json::parse(R"({
    "schema": "dflow.scenario/1",
    "name": "t",
    "grid": {"dim": 1, "extent": [16], "points": [64]},
    "flow": {"family": "heat", "rho0": {"kind": "gaussian", "mean": [0], "cov": [[1]]}},
    "coefficients": {"sigma": 1},
    "time": {"tau": 0.5, "samples": 9},
    "checkers": ["T_inequality", {"name": "S_inequality", "tol": 1e-4}]
  })");
}

ErrorKind kind_of(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Scenario, ParsesMinimalHeatDocument) {
  Scenario sc = parse_scenario(heat_doc());
  EXPECT_EQ(sc.family, Family::Heat);
  EXPECT_EQ(sc.samples, 9);
  EXPECT_DOUBLE_EQ(sc.tau, 0.5);
  ASSERT_EQ(sc.checkers.size(), 2u);
  EXPECT_DOUBLE_EQ(sc.checkers[1].tol, 1e-4);
  EXPECT_EQ(sc.output, "out/t");
}

TEST(Scenario, UnknownKeysAreConfigErrors) {
  json d = heat_doc();
  d["colour"] = "red";
  EXPECT_EQ(kind_of(d), ErrorKind::Config);
  d = heat_doc();
  d["flow"]["rho0"]["widht"] = 2;
  EXPECT_EQ(kind_of(d), ErrorKind::Config);
}

TEST(Scenario, ConvexInteractionIsRejectedWithReason) {
  json d = heat_doc();
  d["flow"]["family"] = "zero_viscosity";
  d["coefficients"] = {{"sigma", 0}, {"W", {{"kind", "quadratic"}, {"b", -0.1}}}};
  try {
    parse_scenario(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    EXPECT_NE(std::string(e.what()).find("concave"), std::string::npos);
  }
}

TEST(Scenario, FamilyRequirements) {
  json d = heat_doc();
  d["flow"]["family"] = "bridge";
  EXPECT_EQ(kind_of(d), ErrorKind::Config);  // rho1 missing
  d = heat_doc();
  d["coefficients"]["sigma"] = 0;
  EXPECT_EQ(kind_of(d), ErrorKind::Config);
  d = heat_doc();
  d["time"]["samples"] = 3;
  EXPECT_EQ(kind_of(d), ErrorKind::Config);
  d = heat_doc();
  d["checkers"] = {"no_such_checker"};
  EXPECT_EQ(kind_of(d), ErrorKind::Config);
  d = heat_doc();
  d["schema"] = "other/1";
  EXPECT_EQ(kind_of(d), ErrorKind::Config);
}

TEST(Scenario, PeriodizedGaussianMatchesImageSum) {
  Grid g = Grid::make(1, {4.0, 1, 1}, {64, 1, 1});
  Vec m(1);
  m[0] = 1.5;
  SymMatrix c = SymMatrix::identity(1);
  Density rho = periodized_gaussian(g, m, c);
  auto ref = oracle::periodic_gaussian(64, 4.0, 1.5, 1.0);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(rho[p], ref[p], 1e-12);
}

TEST(Scenario, MixtureIsNormalised) {
  Grid g = Grid::make(1, {16.0, 1, 1}, {128, 1, 1});
  json d = json::parse(R"({"kind": "mixture", "components": [
      {"weight": 0.25, "density": {"kind": "uniform"}},
      {"weight": 0.75, "density": {"kind": "gaussian", "mean": [0], "cov": [[1]]}}]})");
  Density rho = build_density(d, g, ".");
  EXPECT_NEAR(integrate(rho.field()), 1.0, 1e-13);
  EXPECT_NEAR(rho[0], 0.25 / 16.0, 1e-6);
}

TEST(Scenario, PhaseBuilderCombinesParts) {
  Grid g = Grid::make(1, {8.0, 1, 1}, {64, 1, 1});
  json d = json::parse(R"({"quadratic": [[0.5]], "linear": [0.2],
                            "bumps": [{"center": [0], "width": 1, "amplitude": 0.3}]})");
  Phase th = build_phase(d, g);
  EXPECT_DOUBLE_EQ(th.quad(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(th.linear[0], 0.2);
  ScalarField v = th.values();
  EXPECT_NEAR(v[32], 0.3, 1e-12);  // x = 0
}

TEST(Scenario, RefinementDoublesResolution) {
  Scenario sc = parse_scenario(heat_doc());
  Scenario r = refined_scenario(sc, 2);
  EXPECT_EQ(r.grid.points[0], 128);
  EXPECT_EQ(r.samples, 17);
  EXPECT_DOUBLE_EQ(r.bridge.sinkhorn_tol, sc.bridge.sinkhorn_tol / 10.0);
}

TEST(Scenario, CookbookFilesLoad) {
  for (const char* n : {"heat_gaussian", "bridge_gaussian", "bridge_longtime", "dilation", "confined_pressureless",
                        "mfg_periodic_well", "uniform_stationary", "fault_sign_flip"}) {
    EXPECT_NO_THROW(load_scenario(std::string(DFLOW_SCENARIO_DIR) + "/" + n + ".json")) << n;
  }
}
