#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dflow/sym_matrix.hpp"

namespace dflow {

struct Witness {
  double time = 0.0;
  std::vector<double> direction;
  int eigen_index = -1;
  std::string label;
};

struct CheckPart {
  std::string name;
  double margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool pass = true;
};

struct CheckReport {
  std::string name;
  bool hypotheses_ok = true;
  std::vector<std::string> hypotheses;
  bool pass = false;
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 1e-6;
  double c_fd = 0.0;
  double c_sp = 0.0;
  std::uint64_t seed = 0;
  Witness witness;
  std::vector<CheckPart> parts;
  std::vector<std::string> notes;

  // Records a margin measured against its own tolerance. The stored margin is
  // rescaled to the report tolerance so that one comparison decides pass/fail.
  void observe(const std::string& part, double margin, double part_tol, double time, const Vec* dir = nullptr,
               int eigen_index = -1);
  void refuse(const std::string& why);
  void finalize();
};

}  // namespace dflow
