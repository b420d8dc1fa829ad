#include "dflow/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dflow/error.hpp"
#include "dflow/io.hpp"
#include "dflow/scenario.hpp"

namespace dflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void apply_flags(Scenario& sc, const GlobalFlags& flags) {
  if (flags.seed) sc.seed = *flags.seed;
  if (!flags.out.empty()) sc.output = flags.out;
}

std::string summary_line(const CheckReport& r) {
  std::string s = r.name + ": " + (r.pass ? "PASS" : "FAIL");
  if (!r.hypotheses_ok) {
    s += " (hypotheses not met)";
    return s;
  }
  s += "  worst margin " + g6(r.worst_margin) + "  tol " + g6(r.tolerance);
  if (!r.witness.label.empty()) {
    s += "  witness t=" + g6(r.witness.time) + " [" + r.witness.label + "]";
    if (!r.witness.direction.empty()) {
      s += " w=(";
      for (std::size_t i = 0; i < r.witness.direction.size(); ++i) s += (i ? ", " : "") + g6(r.witness.direction[i]);
      s += ")";
    }
  }
  return s;
}

struct Outcome {
  int code = kExitOk;
  FunctionalSeries series;
  std::vector<CheckReport> reports;
};

// Builds the flow, writes the run directory and optionally runs the checkers.
Outcome execute(const Scenario& sc, const GlobalFlags& flags, bool checks, std::ostream& os, std::ostream& es) {
  Outcome out;
  FlowTrajectory tr;
  try {
    tr = build_flow(sc);
  } catch (const Error& e) {
    es << "flow construction failed: " << e.what() << "\n";
    out.code = is_construction_failure(e.kind()) ? kExitConstruction : kExitConfig;
    return out;
  }
  SeriesOptions so = sc.series;
  so.threads = flags.threads;
  try {
    out.series = assemble_series(tr, so);
  } catch (const Error& e) {
    es << "functionals failed: " << e.what() << "\n";
    out.code = kExitConstruction;
    return out;
  }
  const fs::path dir(sc.output);
  fs::create_directories(dir);
  write_trajectory(tr, (dir / "trajectory").string());
  write_series_csv(out.series, (dir / "series.csv").string());
  write_text((dir / "scenario.json").string(), sc.source.dump(2) + "\n");
  json run;
  run["name"] = sc.name;
  run["family"] = family_name(tr.family);
  run["samples"] = tr.samples();
  run["residual"] = {{"continuity", tr.residual->continuity}, {"phase", tr.residual->phase}};
  run["log"] = tr.log;
  run["series_notes"] = out.series.notes;
  write_text((dir / "run.json").string(), run.dump(2) + "\n");
  os << sc.name << ": " << family_name(tr.family) << " flow, " << tr.samples() << " samples, residual continuity "
     << g6(tr.residual->continuity) << " phase " << g6(tr.residual->phase) << "\n";
  for (const auto& n : out.series.notes) os << "  note: " << n << "\n";

  if (checks) {
    try {
      out.reports = run_checkers(sc, tr, out.series, flags.threads);
    } catch (const Error& e) {
      es << "checker failed: " << e.what() << "\n";
      out.code = is_construction_failure(e.kind()) ? kExitConstruction : kExitConfig;
      return out;
    }
    write_reports(out.reports, (dir / "reports.json").string());
    for (const auto& r : out.reports) {
      os << "  " << summary_line(r) << "\n";
      if (!r.pass) out.code = kExitCheckFailed;
    }
  }
  return out;
}

int load(const std::string& file, const GlobalFlags& flags, Scenario& sc, std::ostream& es) {
  try {
    sc = load_scenario(file);
    apply_flags(sc, flags);
    return kExitOk;
  } catch (const Error& e) {
    es << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int cmd_run(const std::string& file, const GlobalFlags& flags, std::ostream& os, std::ostream& es) {
  Scenario sc;
  if (int c = load(file, flags, sc, es)) return c;
  return execute(sc, flags, false, os, es).code;
}

int cmd_check(const std::string& file, const GlobalFlags& flags, std::ostream& os, std::ostream& es) {
  Scenario sc;
  if (int c = load(file, flags, sc, es)) return c;
  return execute(sc, flags, true, os, es).code;
}

int cmd_sweep(const std::string& file, const std::string& axis, const std::vector<std::string>& values,
              const GlobalFlags& flags, std::ostream& os, std::ostream& es) {
  if (values.empty()) {
    es << "sweep needs at least one value\n";
    return kExitConfig;
  }
  if (axis != "tau" && axis != "points" && axis != "samples" && axis != "sigma") {
    es << "unknown sweep axis '" << axis << "' (tau, points, samples, sigma)\n";
    return kExitConfig;
  }
  Scenario base;
  if (int c = load(file, flags, base, es)) return c;
  std::vector<double> nums;
  for (const auto& v : values) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') {
      es << "sweep value '" << v << "' is not a number\n";
      return kExitConfig;
    }
    nums.push_back(x);
  }
  int code = kExitOk;
  std::vector<FunctionalSeries> runs;
  for (std::size_t i = 0; i < nums.size(); ++i) {
    json doc = base.source;
    if (axis == "tau") {
      // keep the time step of the base scenario
      doc["time"]["tau"] = nums[i];
      doc["time"]["samples"] = static_cast<int>(std::ceil((base.samples - 1) * nums[i] / base.tau - 1e-9)) + 1;
    }
    if (axis == "samples") doc["time"]["samples"] = static_cast<int>(nums[i]);
    if (axis == "sigma") doc["coefficients"]["sigma"] = nums[i];
    if (axis == "points")
      for (auto& p : doc["grid"]["points"]) p = static_cast<int>(nums[i]);
    Scenario sc;
    try {
      sc = parse_scenario(doc, base.base_dir);
    } catch (const Error& e) {
      es << e.what() << "\n";
      return kExitConfig;
    } catch (const json::exception& e) {
      es << e.what() << "\n";
      return kExitConfig;
    }
    sc.seed = base.seed;
    sc.output = (fs::path(base.output) / (axis + "_" + values[i])).string();
    Outcome o = execute(sc, flags, !sc.checkers.empty(), os, es);
    if (o.code == kExitConstruction || o.code == kExitConfig) return o.code;
    if (o.code == kExitCheckFailed) code = kExitCheckFailed;
    runs.push_back(std::move(o.series));
  }
  fs::create_directories(base.output);
  if (axis == "tau" && base.family == Family::Bridge) {
    LongtimeSetup st;
    st.sigma = base.coeffs.sigma;
    st.taus = nums;
    st.bridge = base.bridge;
    CheckOptions opt;
    opt.seed = base.seed;
    opt.threads = flags.threads;
    std::vector<LongtimeRow> rows;
    CheckReport rep;
    try {
      rep = check_longtime({build_density(base.rho0, base.grid, base.base_dir),
                            build_density(base.rho1, base.grid, base.base_dir)},
                           st, opt, &rows);
    } catch (const Error& e) {
      es << "longtime sweep failed: " << e.what() << "\n";
      return kExitConstruction;
    }
    write_reports({rep}, (fs::path(base.output) / "longtime.json").string());
    std::string csv = "tau,O_trace,C_trace,dC_envelope_trace\n";
    for (const auto& r : rows)
      csv += g17(r.tau) + "," + g17(r.O.trace()) + "," + g17(r.C.trace()) + "," + g17(r.dC_envelope.trace()) + "\n";
    write_text((fs::path(base.output) / "longtime.csv").string(), csv);
    os << "  " << summary_line(rep) << "\n";
    if (!rep.pass) code = kExitCheckFailed;
  }
  if (axis == "points" && runs.size() > 1) {
    std::string csv = "from,to,max_abs_change\n";
    for (std::size_t i = 1; i < runs.size(); ++i) {
      const auto& a = runs[i - 1];
      const auto& b = runs[i];
      double worst = 0.0;
      for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
        const auto& ra = a.rec[k];
        const auto& rb = b.rec[k];
        worst = std::max({worst, std::fabs(ra.E - rb.E), (ra.S - rb.S).max_abs(), (ra.I - rb.I).max_abs(),
                          (ra.V - rb.V).max_abs(), (ra.Emat - rb.Emat).max_abs()});
      }
      csv += values[i - 1] + "," + values[i] + "," + g17(worst) + "\n";
      os << "  convergence " << values[i - 1] << " -> " << values[i] << ": max change " << g6(worst) << "\n";
    }
    write_text((fs::path(base.output) / "convergence.csv").string(), csv);
  }
  return code;
}

int cmd_report(const std::string& run_dir, std::ostream& os, std::ostream& es) {
  const fs::path dir(run_dir);
  if (!fs::is_directory(dir)) {
    es << "no such run directory: " << run_dir << "\n";
    return kExitConfig;
  }
  const fs::path series = dir / "series.csv", reports = dir / "reports.json";
  if (!fs::exists(series) && !fs::exists(reports)) {
    es << run_dir << " holds neither series.csv nor reports.json\n";
    return kExitConfig;
  }
  try {
    if (fs::exists(series)) {
      SeriesTable t = read_series_csv(series.string());
      std::string csv = "time,quantity,component,value\n";
      for (const auto& row : t.rows)
        for (std::size_t c = 1; c < t.columns.size(); ++c) {
          const std::string& col = t.columns[c];
          auto us = col.find('_');
          std::string q = us == std::string::npos ? col : col.substr(0, us);
          std::string comp = us == std::string::npos ? "" : col.substr(us + 1);
          csv += g17(row[0]) + "," + q + "," + comp + "," + g17(row[c]) + "\n";
        }
      write_text((dir / "series_long.csv").string(), csv);
      os << "series: " << t.rows.size() << " samples, dim " << t.dim << " -> series_long.csv\n";
    }
    if (fs::exists(reports)) {
      std::string text;
      for (const auto& r : read_reports(reports.string())) {
        text += summary_line(r) + "\n";
        for (const auto& p : r.parts)
          text += "    " + p.name + ": margin " + g6(p.margin) + " (tol " + g6(p.tolerance) + ")" +
                  (p.pass ? "" : " FAIL") + "\n";
      }
      write_text((dir / "summary.txt").string(), text);
      os << text;
    }
  } catch (const Error& e) {
    es << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace dflow
