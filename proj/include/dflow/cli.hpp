#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dflow {

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitConstruction = 3 };

struct GlobalFlags {
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::string out;  // overrides the scenario's output directory when set
};

int cmd_run(const std::string& scenario_file, const GlobalFlags& flags, std::ostream& os, std::ostream& es);
int cmd_check(const std::string& scenario_file, const GlobalFlags& flags, std::ostream& os, std::ostream& es);
int cmd_sweep(const std::string& scenario_file, const std::string& axis, const std::vector<std::string>& values,
              const GlobalFlags& flags, std::ostream& os, std::ostream& es);
int cmd_report(const std::string& run_dir, std::ostream& os, std::ostream& es);

}  // namespace dflow
