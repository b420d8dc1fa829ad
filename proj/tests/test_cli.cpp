#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "dflow/cli.hpp"
#include "dflow/io.hpp"

using namespace dflow;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) { return std::string(DFLOW_SCENARIO_DIR) + "/" + name + ".json"; }

GlobalFlags flags_into(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("dflow_cli_" + name);
  fs::remove_all(p);
  GlobalFlags f;
  f.out = p.string();
  return f;
}

std::string write_temp(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / name;
  write_text(p.string(), text);
  return p.string();
}

}  // namespace

TEST(Cli, CheckPassingScenarioExitsZero) {
  std::ostringstream os, es;
  GlobalFlags f = flags_into("heat");
  EXPECT_EQ(cmd_check(scenario_path("heat_gaussian"), f, os, es), kExitOk) << es.str();
  EXPECT_NE(os.str().find("T_inequality: PASS"), std::string::npos);
  for (const char* file : {"series.csv", "reports.json", "run.json", "scenario.json", "trajectory/meta.json"})
    EXPECT_TRUE(fs::exists(fs::path(f.out) / file)) << file;
}

TEST(Cli, FailingCheckExitsOne) {
  std::ostringstream os, es;
  EXPECT_EQ(cmd_check(scenario_path("fault_sign_flip"), flags_into("flip"), os, es), kExitCheckFailed);
  EXPECT_NE(os.str().find("FAIL"), std::string::npos);
}

TEST(Cli, RefusedCheckerExitsOne) {
  std::ostringstream os, es;
  EXPECT_EQ(cmd_check(scenario_path("guard_interaction"), flags_into("guard"), os, es), kExitCheckFailed);
  EXPECT_NE(os.str().find("hypotheses not met"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  std::ostringstream os, es;
  EXPECT_EQ(cmd_check(scenario_path("invalid_interaction"), flags_into("bad"), os, es), kExitConfig);
  EXPECT_NE(es.str().find("concave"), std::string::npos);
  EXPECT_EQ(cmd_run("/nonexistent/scenario.json", flags_into("missing"), os, es), kExitConfig);
  EXPECT_EQ(cmd_run(write_temp("dflow_broken.json", "{not json"), flags_into("broken"), os, es), kExitConfig);
}

TEST(Cli, ConstructionFailureExitsThree) {
  std::string doc = R"({"schema": "dflow.scenario/1", "name": "focus",
    "grid": {"dim": 1, "extent": [16], "points": [128]},
    "flow": {"family": "zero_viscosity", "rho0": {"kind": "gaussian", "mean": [0], "cov": [[1]]},
             "theta0": {"quadratic": [[-2]]}},
    "coefficients": {"sigma": 0}, "time": {"tau": 1, "samples": 17}})";
  std::ostringstream os, es;
  EXPECT_EQ(cmd_run(write_temp("dflow_focus.json", doc), flags_into("focus"), os, es), kExitConstruction);
  EXPECT_NE(es.str().find("vacuum"), std::string::npos);
}

TEST(Cli, SeedFlagOverridesScenario) {
  std::ostringstream os, es;
  GlobalFlags f = flags_into("seed");
  f.seed = 99;
  ASSERT_EQ(cmd_check(scenario_path("heat_gaussian"), f, os, es), kExitOk);
  for (const auto& r : read_reports((fs::path(f.out) / "reports.json").string())) EXPECT_EQ(r.seed, 99u);
}

TEST(Cli, SweepValidatesArguments) {
  std::ostringstream os, es;
  EXPECT_EQ(cmd_sweep(scenario_path("heat_gaussian"), "tau", {}, flags_into("sw0"), os, es), kExitConfig);
  EXPECT_EQ(cmd_sweep(scenario_path("heat_gaussian"), "colour", {"1"}, flags_into("sw1"), os, es), kExitConfig);
  EXPECT_EQ(cmd_sweep(scenario_path("heat_gaussian"), "tau", {"x"}, flags_into("sw2"), os, es), kExitConfig);
}

TEST(Cli, PointsSweepWritesConvergenceTable) {
  std::ostringstream os, es;
  GlobalFlags f = flags_into("points");
  ASSERT_EQ(cmd_sweep(scenario_path("heat_gaussian"), "points", {"128", "256"}, f, os, es), kExitOk) << es.str();
  EXPECT_TRUE(fs::exists(fs::path(f.out) / "points_128" / "series.csv"));
  std::string csv = read_text((fs::path(f.out) / "convergence.csv").string());
  EXPECT_EQ(csv.rfind("from,to,max_abs_change\n128,256,", 0), 0u);
}

TEST(Cli, ReportReformatsARunDirectory) {
  std::ostringstream os, es;
  GlobalFlags f = flags_into("report");
  ASSERT_EQ(cmd_check(scenario_path("dilation"), f, os, es), kExitOk) << es.str();
  std::ostringstream ro, re;
  EXPECT_EQ(cmd_report(f.out, ro, re), kExitOk) << re.str();
  EXPECT_TRUE(fs::exists(fs::path(f.out) / "series_long.csv"));
  EXPECT_TRUE(fs::exists(fs::path(f.out) / "summary.txt"));
  EXPECT_NE(ro.str().find("S_inequality: PASS"), std::string::npos);
  EXPECT_EQ(cmd_report("/nonexistent/run", ro, re), kExitConfig);
}
