#pragma once

#include <string>
#include <vector>

#include "dflow/check_report.hpp"
#include "dflow/functionals.hpp"
#include "dflow/trajectory.hpp"

namespace dflow {

// Series CSV: t,E,O, then S, I, Tplus, Tminus, Emat, V in row-major upper-triangle order.
std::vector<std::string> series_columns(int dim);
std::string series_csv(const FunctionalSeries& s);
void write_series_csv(const FunctionalSeries& s, const std::string& path);

struct SeriesTable {
  int dim = 1;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

SeriesTable read_series_csv(const std::string& path);

// Binary field: "DF", uint16 dim, 3 x uint32 points, then row-major doubles.
void write_field(const ScalarField& f, const std::string& path);
// Extents are not stored in the file; they come from the caller's grid.
ScalarField read_field(const std::string& path, const Grid& g);

// Directory with meta.json plus binary files per snapshot. Bit-exact round trip.
void write_trajectory(const FlowTrajectory& traj, const std::string& dir);
FlowTrajectory read_trajectory(const std::string& dir);

std::string reports_json(const std::vector<CheckReport>& reps);
void write_reports(const std::vector<CheckReport>& reps, const std::string& path);
std::vector<CheckReport> read_reports(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace dflow
