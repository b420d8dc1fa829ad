#include "dflow/check_report.hpp"

#include <cmath>

namespace dflow {

void CheckReport::observe(const std::string& part, double margin, double part_tol, double time, const Vec* dir,
                          int eigen_index) {
  if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
  double scaled = (part_tol > 0.0 && std::isfinite(margin) && margin < 0.0) ? margin * (tolerance / part_tol) : margin;
  CheckPart* slot = nullptr;
  for (auto& p : parts)
    if (p.name == part) slot = &p;
  if (!slot) {
    parts.push_back({part, std::numeric_limits<double>::infinity(), part_tol, true});
    slot = &parts.back();
  }
  if (margin < slot->margin) slot->margin = margin;
  slot->tolerance = part_tol;
  slot->pass = slot->margin >= -part_tol;
  if (scaled < worst_margin) {
    worst_margin = scaled;
    witness.time = time;
    witness.label = part;
    witness.eigen_index = eigen_index;
    witness.direction.clear();
    if (dir)
      for (int i = 0; i < dir->dim; ++i) witness.direction.push_back((*dir)[i]);
  }
}

void CheckReport::refuse(const std::string& why) {
  hypotheses_ok = false;
  notes.push_back("hypotheses not met: " + why);
}

void CheckReport::finalize() {
  if (!std::isfinite(worst_margin) && worst_margin > 0) worst_margin = std::numeric_limits<double>::max();
  pass = hypotheses_ok && worst_margin >= -tolerance;
}

}  // namespace dflow
