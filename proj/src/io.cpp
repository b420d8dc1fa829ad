#include "dflow/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dflow/error.hpp"

namespace dflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no infinities or NaN.
json jnum(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double from_jnum(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::Io, "bad number '" + s + "'");
  }
  return j.get<double>();
}

json mat_json(const SymMatrix& m) {
  json j;
  j["dim"] = m.dim();
  json e = json::array();
  for (int k = 0; k < sym_count(m.dim()); ++k) e.push_back(jnum(m.packed(k)));
  j["upper"] = e;
  return j;
}

SymMatrix mat_from(const json& j) {
  SymMatrix m(j.at("dim").get<int>());
  const json& e = j.at("upper");
  if (static_cast<int>(e.size()) != sym_count(m.dim())) throw Error(ErrorKind::Io, "matrix entry count mismatch");
  for (int k = 0; k < sym_count(m.dim()); ++k) m.packed(k) = from_jnum(e[k]);
  return m;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.dim; ++i) a.push_back(jnum(v[i]));
  return a;
}

Vec vec_from(const json& j) {
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.dim; ++i) v[i] = from_jnum(j[i]);
  return v;
}

void append_matrix_cols(std::vector<std::string>& cols, const std::string& name, int dim) {
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) cols.push_back(name + "_" + std::to_string(i) + std::to_string(j));
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> series_columns(int dim) {
  std::vector<std::string> cols{"t", "E", "O"};
  for (const char* n : {"S", "I", "Tplus", "Tminus", "Emat", "V"}) append_matrix_cols(cols, n, dim);
  return cols;
}

std::string series_csv(const FunctionalSeries& s) {
  std::string out;
  auto cols = series_columns(s.dim);
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& r : s.rec) {
    out += num(r.t) + "," + num(r.E) + "," + num(r.O);
    for (const SymMatrix* m : {&r.S, &r.I, &r.Tplus, &r.Tminus, &r.Emat, &r.V})
      for (int k = 0; k < sym_count(s.dim); ++k) out += "," + num(m->packed(k));
    out += "\n";
  }
  return out;
}

void write_series_csv(const FunctionalSeries& s, const std::string& path) { write_text(path, series_csv(s)); }

std::size_t SeriesTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error(ErrorKind::Io, "no column " + name);
}

SeriesTable read_series_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  SeriesTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "empty series file " + path);
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) t.columns.push_back(c);
  bool found = false;
  for (int d = 1; d <= 3; ++d)
    if (series_columns(d) == t.columns) {
      t.dim = d;
      found = true;
    }
  if (!found) throw Error(ErrorKind::Io, "unrecognised series header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) row.push_back(std::strtod(c.c_str(), nullptr));
    if (row.size() != t.columns.size()) throw Error(ErrorKind::Io, "ragged row in " + path);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_field(const ScalarField& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  char header[16] = {'D', 'F'};
  std::uint16_t dim = static_cast<std::uint16_t>(f.grid.dim);
  std::memcpy(header + 2, &dim, 2);
  for (int a = 0; a < 3; ++a) {
    std::uint32_t n = static_cast<std::uint32_t>(f.grid.points[a]);
    std::memcpy(header + 4 + 4 * a, &n, 4);
  }
  out.write(header, 16);
  out.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

ScalarField read_field(const std::string& path, const Grid& g) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  char header[16];
  in.read(header, 16);
  if (!in || header[0] != 'D' || header[1] != 'F') throw Error(ErrorKind::Io, "bad field header in " + path);
  std::uint16_t dim;
  std::memcpy(&dim, header + 2, 2);
  if (dim != g.dim) throw Error(ErrorKind::Io, "field dimension mismatch in " + path);
  for (int a = 0; a < 3; ++a) {
    std::uint32_t n;
    std::memcpy(&n, header + 4 + 4 * a, 4);
    if (static_cast<int>(n) != g.points[a]) throw Error(ErrorKind::Io, "field shape mismatch in " + path);
  }
  ScalarField f(g);
  in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!in) throw Error(ErrorKind::Io, "truncated field file " + path);
  return f;
}

void write_trajectory(const FlowTrajectory& traj, const std::string& dir) {
  fs::create_directories(dir);
  const Grid& g = traj.grid;
  json meta;
  meta["schema"] = "dflow.trajectory/1";
  meta["grid"] = {{"dim", g.dim},
                  {"extent", {g.extent[0], g.extent[1], g.extent[2]}},
                  {"points", {g.points[0], g.points[1], g.points[2]}}};
  json times = json::array();
  for (double t : traj.times) times.push_back(t);
  meta["times"] = times;
  meta["family"] = family_name(traj.family);
  meta["boundary"] = boundary_name(traj.boundary);

  const CoefficientSet& c = traj.coeffs;
  json co;
  co["sigma"] = c.sigma;
  json U;
  switch (c.U.kind) {
    case Potential::Kind::Zero: U["kind"] = "zero"; break;
    case Potential::Kind::Quadratic:
      U["kind"] = "quadratic";
      U["A"] = mat_json(c.U.A);
      U["c"] = vec_json(c.U.c);
      break;
    case Potential::Kind::Gridded:
      U["kind"] = "gridded";
      U["file"] = "U.bin";
      write_field(*c.U.field, (fs::path(dir) / "U.bin").string());
      break;
  }
  co["U"] = U;
  json W;
  switch (c.W.kind) {
    case Interaction::Kind::Zero: W["kind"] = "zero"; break;
    case Interaction::Kind::Quadratic:
      W["kind"] = "quadratic";
      W["b"] = c.W.b;
      break;
    case Interaction::Kind::Gridded:
      W["kind"] = "gridded";
      W["file"] = "W.bin";
      write_field(*c.W.kernel, (fs::path(dir) / "W.bin").string());
      break;
  }
  co["W"] = W;
  const char* fk[] = {"zero", "log", "linear", "power"};
  co["f"] = {{"kind", fk[static_cast<int>(c.f.kind)]}, {"eps", c.f.eps}, {"p", c.f.p}};
  meta["coeffs"] = co;

  if (traj.residual) meta["residual"] = {{"continuity", traj.residual->continuity}, {"phase", traj.residual->phase}};
  const HypothesisStamps& st = traj.stamps;
  meta["stamps"] = {{"stamped", st.stamped},
                    {"sigma_nonnegative", st.sigma_nonnegative},
                    {"f_nondecreasing", st.f_nondecreasing},
                    {"convex_confinement", st.convex_confinement},
                    {"min_convexity_eig", jnum(st.min_convexity_eig)}};
  meta["log"] = traj.log;

  json snaps = json::array();
  for (std::size_t k = 0; k < traj.snaps.size(); ++k) {
    const Snapshot& s = traj.snaps[k];
    char stem[32];
    std::snprintf(stem, sizeof stem, "snap_%04zu", k);
    std::string base = stem;
    write_field(s.rho.field(), (fs::path(dir) / (base + "_rho.bin")).string());
    write_field(s.theta.smooth, (fs::path(dir) / (base + "_theta.bin")).string());
    json js;
    js["rho"] = base + "_rho.bin";
    js["floor"] = s.rho.floor();
    js["theta"] = base + "_theta.bin";
    js["quad"] = mat_json(s.theta.quad);
    js["linear"] = vec_json(s.theta.linear);
    json logs = json::array();
    for (std::size_t j = 0; j < s.theta.logs.size(); ++j) {
      std::string name = base + "_log" + std::to_string(j) + ".bin";
      write_field(s.theta.logs[j].positive, (fs::path(dir) / name).string());
      logs.push_back({{"coef", s.theta.logs[j].coef}, {"file", name}});
    }
    js["logs"] = logs;
    snaps.push_back(js);
  }
  meta["snapshots"] = snaps;
  write_text((fs::path(dir) / "meta.json").string(), meta.dump(1) + "\n");
}

FlowTrajectory read_trajectory(const std::string& dir) {
  json meta;
  try {
    meta = json::parse(read_text((fs::path(dir) / "meta.json").string()));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("meta.json: ") + e.what());
  }
  try {
    if (meta.at("schema") != "dflow.trajectory/1") throw Error(ErrorKind::Io, "unknown trajectory schema");
    FlowTrajectory tr;
    const json& jg = meta.at("grid");
    tr.grid = Grid::make(jg.at("dim").get<int>(),
                         {jg["extent"][0].get<double>(), jg["extent"][1].get<double>(), jg["extent"][2].get<double>()},
                         {jg["points"][0].get<int>(), jg["points"][1].get<int>(), jg["points"][2].get<int>()});
    const Grid& g = tr.grid;
    for (const auto& t : meta.at("times")) tr.times.push_back(t.get<double>());
    tr.family = parse_family(meta.at("family").get<std::string>());
    tr.boundary = parse_boundary(meta.at("boundary").get<std::string>());

    const json& co = meta.at("coeffs");
    tr.coeffs.sigma = co.at("sigma").get<double>();
    const json& U = co.at("U");
    std::string uk = U.at("kind").get<std::string>();
    if (uk == "quadratic") tr.coeffs.U = Potential::quadratic(mat_from(U.at("A")), vec_from(U.at("c")));
    else if (uk == "gridded")
      tr.coeffs.U = Potential::gridded(read_field((fs::path(dir) / U.at("file").get<std::string>()).string(), g));
    const json& W = co.at("W");
    std::string wk = W.at("kind").get<std::string>();
    if (wk == "quadratic") tr.coeffs.W = Interaction::quadratic(W.at("b").get<double>());
    else if (wk == "gridded")
      tr.coeffs.W = Interaction::gridded(read_field((fs::path(dir) / W.at("file").get<std::string>()).string(), g));
    const json& f = co.at("f");
    std::string fk = f.at("kind").get<std::string>();
    double eps = f.at("eps").get<double>(), p = f.at("p").get<double>();
    if (fk == "log") tr.coeffs.f = Congestion::log(eps);
    else if (fk == "linear") tr.coeffs.f = Congestion::linear(eps);
    else if (fk == "power") tr.coeffs.f = Congestion::power(eps, p);

    if (meta.contains("residual"))
      tr.residual = Residual{meta["residual"].at("continuity").get<double>(), meta["residual"].at("phase").get<double>()};
    const json& st = meta.at("stamps");
    tr.stamps.stamped = st.at("stamped").get<bool>();
    tr.stamps.sigma_nonnegative = st.at("sigma_nonnegative").get<bool>();
    tr.stamps.f_nondecreasing = st.at("f_nondecreasing").get<bool>();
    tr.stamps.convex_confinement = st.at("convex_confinement").get<bool>();
    tr.stamps.min_convexity_eig = from_jnum(st.at("min_convexity_eig"));
    tr.log = meta.at("log").get<std::vector<std::string>>();

    for (const auto& js : meta.at("snapshots")) {
      Snapshot s;
      ScalarField r = read_field((fs::path(dir) / js.at("rho").get<std::string>()).string(), g);
      s.rho = Density::adopt(r, js.at("floor").get<double>());
      s.theta = Phase(read_field((fs::path(dir) / js.at("theta").get<std::string>()).string(), g));
      s.theta.quad = mat_from(js.at("quad"));
      s.theta.linear = vec_from(js.at("linear"));
      for (const auto& jl : js.at("logs"))
        s.theta.logs.push_back(
            {jl.at("coef").get<double>(), read_field((fs::path(dir) / jl.at("file").get<std::string>()).string(), g)});
      tr.snaps.push_back(std::move(s));
    }
    if (tr.snaps.size() != tr.times.size()) throw Error(ErrorKind::Io, "snapshot count does not match times");
    return tr;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("meta.json: ") + e.what());
  }
}

namespace {

json report_json(const CheckReport& r) {
  json j;
  j["name"] = r.name;
  j["hypotheses_ok"] = r.hypotheses_ok;
  j["hypotheses"] = r.hypotheses;
  j["pass"] = r.pass;
  j["worst_margin"] = jnum(r.worst_margin);
  j["tolerance"] = jnum(r.tolerance);
  j["c_fd"] = jnum(r.c_fd);
  j["c_sp"] = jnum(r.c_sp);
  j["seed"] = r.seed;
  j["witness"] = {{"time", jnum(r.witness.time)},
                  {"direction", r.witness.direction},
                  {"eigen_index", r.witness.eigen_index},
                  {"label", r.witness.label}};
  json parts = json::array();
  for (const auto& p : r.parts)
    parts.push_back({{"name", p.name}, {"margin", jnum(p.margin)}, {"tolerance", jnum(p.tolerance)}, {"pass", p.pass}});
  j["parts"] = parts;
  j["notes"] = r.notes;
  return j;
}

CheckReport report_from(const json& j) {
  CheckReport r;
  r.name = j.at("name").get<std::string>();
  r.hypotheses_ok = j.at("hypotheses_ok").get<bool>();
  r.hypotheses = j.at("hypotheses").get<std::vector<std::string>>();
  r.pass = j.at("pass").get<bool>();
  r.worst_margin = from_jnum(j.at("worst_margin"));
  r.tolerance = from_jnum(j.at("tolerance"));
  r.c_fd = from_jnum(j.at("c_fd"));
  r.c_sp = from_jnum(j.at("c_sp"));
  r.seed = j.at("seed").get<std::uint64_t>();
  const json& w = j.at("witness");
  r.witness.time = from_jnum(w.at("time"));
  r.witness.direction = w.at("direction").get<std::vector<double>>();
  r.witness.eigen_index = w.at("eigen_index").get<int>();
  r.witness.label = w.at("label").get<std::string>();
  for (const auto& p : j.at("parts"))
    r.parts.push_back({p.at("name").get<std::string>(), from_jnum(p.at("margin")), from_jnum(p.at("tolerance")),
                       p.at("pass").get<bool>()});
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

}  // namespace

std::string reports_json(const std::vector<CheckReport>& reps) {
  json a = json::array();
  for (const auto& r : reps) a.push_back(report_json(r));
  return a.dump(2) + "\n";
}

void write_reports(const std::vector<CheckReport>& reps, const std::string& path) { write_text(path, reports_json(reps)); }

std::vector<CheckReport> read_reports(const std::string& path) {
  try {
    json a = json::parse(read_text(path));
    std::vector<CheckReport> out;
    for (const auto& j : a) out.push_back(report_from(j));
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, path + ": " + e.what());
  }
}

}  // namespace dflow
