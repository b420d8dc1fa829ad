#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Flow construction and matrix-inequality checks for density flows"};
  app.require_subcommand(1);
  dflow::GlobalFlags flags;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "seed for random probe directions");
  app.add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", flags.out, "output directory");

  std::string file, dir, axis;
  std::vector<std::string> values;
  auto* run = app.add_subcommand("run", "construct the flow and write trajectory and series");
  run->add_option("scenario", file, "scenario JSON")->required();
  auto* check = app.add_subcommand("check", "construct the flow and run the configured checkers");
  check->add_option("scenario", file, "scenario JSON")->required();
  auto* sweep = app.add_subcommand("sweep", "repeat a scenario over one parameter axis");
  sweep->add_option("scenario", file, "scenario JSON")->required();
  sweep->add_option("--axis", axis, "tau, points, samples or sigma")->required();
  sweep->add_option("--values", values, "comma separated values")->delimiter(',');
  auto* report = app.add_subcommand("report", "summarise a run directory");
  report->add_option("dir", dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : dflow::kExitConfig;
  }
  if (*seed_opt) flags.seed = seed;
  if (*run) return dflow::cmd_run(file, flags, std::cout, std::cerr);
  if (*check) return dflow::cmd_check(file, flags, std::cout, std::cerr);
  if (*sweep) return dflow::cmd_sweep(file, axis, values, flags, std::cout, std::cerr);
  return dflow::cmd_report(dir, std::cout, std::cerr);
}
