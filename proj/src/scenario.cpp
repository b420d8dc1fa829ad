#include "dflow/scenario.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <set>
#include <thread>

#include "dflow/error.hpp"
#include "dflow/io.hpp"
#include "dflow/matrix_comparison.hpp"

namespace dflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

void allow_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) config(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) config("unknown key '" + it.key() + "' in " + where);
}

double get_num(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) config("missing '" + key + "' in " + where);
  if (!obj[key].is_number()) config("'" + key + "' in " + where + " must be a number");
  return obj[key].get<double>();
}

double num_or(const json& obj, const std::string& key, double dflt, const std::string& where) {
  return obj.contains(key) ? get_num(obj, key, where) : dflt;
}

int int_or(const json& obj, const std::string& key, int dflt, const std::string& where) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number_integer()) config("'" + key + "' in " + where + " must be an integer");
  return obj[key].get<int>();
}

Vec get_vec(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) config(where + " must be an array of length " + std::to_string(dim));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_number()) config(where + " must hold numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

SymMatrix get_mat(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) config(where + " must be a " + std::to_string(dim) + "x" +
                                                                  std::to_string(dim) + " array");
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) {
    Vec row = get_vec(j[i], dim, where);
    for (int k = 0; k < dim; ++k) {
      if (k >= i) m.at(i, k) = row[k];
      else if (std::fabs(m(k, i) - row[k]) > 1e-14 * (1.0 + std::fabs(row[k]))) config(where + " must be symmetric");
    }
  }
  return m;
}

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).string();
}

Potential parse_U(const json& j, const Grid& g, const std::string& base) {
  allow_keys(j, {"kind", "A", "c", "amplitude", "path"}, "U");
  std::string k = j.value("kind", "zero");
  if (k == "zero") return Potential::zero();
  if (k == "quadratic") {
    SymMatrix A = get_mat(j.at("A"), g.dim, "U.A");
    Vec c = j.contains("c") ? get_vec(j["c"], g.dim, "U.c") : Vec(g.dim);
    return Potential::quadratic(A, c);
  }
  if (k == "periodic_well") {
    // sum_a amplitude (L_a / 2 pi)^2 (1 - cos(2 pi x_a / L_a)): curvature `amplitude` at the origin.
    double A = get_num(j, "amplitude", "U");
    return Potential::gridded(ScalarField::from_function(g, [&](const Vec& x) {
      double s = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        double kk = 2.0 * M_PI / g.extent[a];
        s += A / (kk * kk) * (1.0 - std::cos(kk * x[a]));
      }
      return s;
    }));
  }
  if (k == "file") return Potential::gridded(read_field(resolve(base, j.at("path").get<std::string>()), g));
  config("unknown U kind '" + k + "'");
}

Interaction parse_W(const json& j, const Grid& g, const std::string& base) {
  allow_keys(j, {"kind", "b", "path"}, "W");
  std::string k = j.value("kind", "zero");
  if (k == "zero") return Interaction::zero();
  if (k == "quadratic") {
    double b = get_num(j, "b", "W");
    if (b < 0.0) config("W = -b|x|^2 must be concave: b >= 0 required, got b = " + std::to_string(b));
    return Interaction::quadratic(b);
  }
  if (k == "file") return Interaction::gridded(read_field(resolve(base, j.at("path").get<std::string>()), g));
  config("unknown W kind '" + k + "'");
}

Congestion parse_f(const json& j) {
  allow_keys(j, {"kind", "eps", "p"}, "f");
  std::string k = j.value("kind", "zero");
  if (k == "zero") return Congestion::zero();
  double eps = get_num(j, "eps", "f");
  if (k == "log") return Congestion::log(eps);
  if (k == "linear") return Congestion::linear(eps);
  if (k == "power") return Congestion::power(eps, get_num(j, "p", "f"));
  config("unknown f kind '" + k + "'");
}

ScalarField gaussian_values(const Grid& g, const Vec& mean, const SymMatrix& cov) {
  SymMatrix prec = sym_inverse(cov);
  return ScalarField::from_function(g, [&](const Vec& x) {
    double s = 0.0;
    int r1 = g.dim > 1 ? 3 : 0, r2 = g.dim > 2 ? 3 : 0;
    for (int i = -3; i <= 3; ++i)
      for (int j = -r1; j <= r1; ++j)
        for (int k = -r2; k <= r2; ++k) {
          Vec d = x - mean;
          d[0] += i * g.extent[0];
          if (g.dim > 1) d[1] += j * g.extent[1];
          if (g.dim > 2) d[2] += k * g.extent[2];
          s += std::exp(-0.5 * prec.quad(d));
        }
    return s;
  });
}

void parallel_run(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(n);
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

const std::set<std::string> kSeriesCheckers{"T_inequality",  "S_inequality", "entropy_growth",  "turnpike",
                                            "energy",        "matrix_energy", "cost_identity",  "cost_inequality",
                                            "time_symmetry", "residual"};

}  // namespace

Density periodized_gaussian(const Grid& g, const Vec& mean, const SymMatrix& cov) {
  for (double l : sym_eig(cov).values)
    if (!(l > 0.0)) config("gaussian covariance must be positive definite");
  return Density::construct(gaussian_values(g, mean, cov));
}

Density build_density(const json& desc, const Grid& g, const std::string& base) {
  allow_keys(desc, {"kind", "mean", "cov", "components", "path"}, "density");
  std::string k = desc.value("kind", "");
  if (k == "uniform") return Density::construct(ScalarField(g, 1.0));
  if (k == "gaussian")
    return periodized_gaussian(g, get_vec(desc.at("mean"), g.dim, "gaussian.mean"),
                               get_mat(desc.at("cov"), g.dim, "gaussian.cov"));
  if (k == "mixture") {
    if (!desc.contains("components") || !desc["components"].is_array() || desc["components"].empty())
      config("mixture needs a non-empty 'components' array");
    ScalarField sum(g, 0.0);
    double wsum = 0.0;
    for (const auto& c : desc["components"]) {
      allow_keys(c, {"weight", "density"}, "mixture component");
      double w = get_num(c, "weight", "mixture component");
      if (!(w > 0.0)) config("mixture weights must be positive");
      Density d = build_density(c.at("density"), g, base);
      for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += w * d[p];
      wsum += w;
    }
    for (double& v : sum.values) v /= wsum;
    return Density::construct(sum);
  }
  if (k == "file") return Density::construct(read_field(resolve(base, desc.at("path").get<std::string>()), g));
  config("unknown density kind '" + k + "'");
}

Phase build_phase(const json& desc, const Grid& g) {
  allow_keys(desc, {"quadratic", "linear", "modes", "bumps"}, "phase");
  Phase th = Phase::zero(g);
  if (desc.contains("quadratic")) th.quad = get_mat(desc["quadratic"], g.dim, "phase.quadratic");
  else th.quad = SymMatrix(g.dim);
  th.linear = desc.contains("linear") ? get_vec(desc["linear"], g.dim, "phase.linear") : Vec(g.dim);
  if (desc.contains("modes")) {
    for (const auto& m : desc["modes"]) {
      allow_keys(m, {"k", "amplitude", "shift"}, "phase mode");
      Vec k = get_vec(m.at("k"), g.dim, "mode.k");
      double amp = get_num(m, "amplitude", "phase mode"), sh = num_or(m, "shift", 0.0, "phase mode");
      for (std::size_t p = 0; p < g.size(); ++p) {
        Vec x = g.point(p);
        double arg = sh;
        for (int a = 0; a < g.dim; ++a) arg += 2.0 * M_PI * k[a] * x[a] / g.extent[a];
        th.smooth[p] += amp * std::cos(arg);
      }
    }
  }
  if (desc.contains("bumps")) {
    for (const auto& b : desc["bumps"]) {
      allow_keys(b, {"center", "width", "amplitude"}, "phase bump");
      Vec c = get_vec(b.at("center"), g.dim, "bump.center");
      double w = get_num(b, "width", "phase bump"), amp = get_num(b, "amplitude", "phase bump");
      if (!(w > 0.0)) config("bump width must be positive");
      for (std::size_t p = 0; p < g.size(); ++p) {
        Vec d = g.point(p) - c;
        th.smooth[p] += amp * std::exp(-d.dot(d) / (w * w));
      }
    }
  }
  return th;
}

Scenario parse_scenario(const json& doc, const std::string& base_dir) {
  allow_keys(doc, {"schema", "name", "grid", "flow", "coefficients", "time", "checkers", "seed", "output", "series",
                   "faults"},
             "scenario");
  if (doc.value("schema", "") != "dflow.scenario/1") config("schema must be \"dflow.scenario/1\"");
  Scenario sc;
  sc.source = doc;
  sc.base_dir = base_dir;
  if (!doc.contains("name") || !doc["name"].is_string()) config("scenario needs a string 'name'");
  sc.name = doc["name"].get<std::string>();

  const json& jg = doc.at("grid");
  allow_keys(jg, {"dim", "extent", "points"}, "grid");
  int dim = int_or(jg, "dim", 1, "grid");
  if (dim < 1 || dim > 3) config("grid.dim must be 1, 2 or 3");
  Vec ext = get_vec(jg.at("extent"), dim, "grid.extent");
  std::array<double, 3> e{1.0, 1.0, 1.0};
  std::array<int, 3> n{1, 1, 1};
  for (int a = 0; a < dim; ++a) {
    e[a] = ext[a];
    if (!jg["points"].is_array() || static_cast<int>(jg["points"].size()) != dim || !jg["points"][a].is_number_integer())
      config("grid.points must be an integer array of length dim");
    n[a] = jg["points"][a].get<int>();
    if (!(e[a] > 0.0) || n[a] < 8) config("grid extents must be positive and points >= 8");
  }
  try {
    sc.grid = Grid::make(dim, e, n);
  } catch (const Error& err) {
    config(err.what());
  }

  const json& jt = doc.at("time");
  allow_keys(jt, {"tau", "samples"}, "time");
  sc.tau = get_num(jt, "tau", "time");
  sc.samples = int_or(jt, "samples", 64, "time");
  if (!(sc.tau > 0.0)) config("time.tau must be positive");
  if (sc.samples < 5) config("time.samples must be at least 5");

  const json jc = doc.value("coefficients", json::object());
  allow_keys(jc, {"sigma", "U", "W", "f"}, "coefficients");
  sc.coeffs.sigma = num_or(jc, "sigma", 0.0, "coefficients");
  if (!(sc.coeffs.sigma >= 0.0)) config("sigma must be real and >= 0");
  sc.coeffs.U = parse_U(jc.value("U", json::object()), sc.grid, base_dir);
  sc.coeffs.W = parse_W(jc.value("W", json::object()), sc.grid, base_dir);
  sc.coeffs.f = parse_f(jc.value("f", json::object()));

  const json& jf = doc.at("flow");
  allow_keys(jf, {"family", "rho0", "rho1", "theta0", "u_tau", "options"}, "flow");
  try {
    sc.family = parse_family(jf.at("family").get<std::string>());
  } catch (const json::exception&) {
    config("flow.family must be a string");
  }
  sc.rho0 = jf.value("rho0", json{{"kind", "uniform"}});
  sc.rho1 = jf.value("rho1", json());
  sc.theta0 = jf.value("theta0", json::object());
  sc.u_tau = jf.value("u_tau", json::object());
  const json opts = jf.value("options", json::object());
  const std::string fam = family_name(sc.family);
  switch (sc.family) {
    case Family::Stationary:
      allow_keys(opts, {}, "flow.options");
      if (sc.rho0.value("kind", "") != "uniform") config("stationary flow needs a uniform rho0");
      if (!sc.coeffs.U.is_zero()) config("stationary flow needs U = 0");
      break;
    case Family::Heat:
      allow_keys(opts, {}, "flow.options");
      if (!sc.coeffs.entropic()) config("heat flow needs U = W = f = 0");
      if (!(sc.coeffs.sigma > 0.0)) config("heat flow needs sigma > 0");
      break;
    case Family::ZeroViscosity:
      allow_keys(opts, {"cfl", "window_inner", "window_outer"}, "flow.options");
      if (sc.coeffs.sigma != 0.0) config("zero_viscosity flow needs sigma = 0");
      sc.zv.cfl = num_or(opts, "cfl", sc.zv.cfl, "flow.options");
      sc.zv.window_inner = num_or(opts, "window_inner", sc.zv.window_inner, "flow.options");
      sc.zv.window_outer = num_or(opts, "window_outer", sc.zv.window_outer, "flow.options");
      if (!(sc.zv.window_inner > 0.0 && sc.zv.window_inner < sc.zv.window_outer && sc.zv.window_outer <= 0.5))
        config("window must satisfy 0 < inner < outer <= 0.5");
      break;
    case Family::Bridge:
      allow_keys(opts, {"sinkhorn_tol", "max_iter", "force_log_domain"}, "flow.options");
      if (!sc.coeffs.entropic()) config("bridge needs U = W = f = 0");
      if (!(sc.coeffs.sigma > 0.0)) config("bridge needs sigma > 0");
      if (sc.rho1.is_null()) config("bridge needs rho1");
      sc.bridge.sinkhorn_tol = num_or(opts, "sinkhorn_tol", sc.bridge.sinkhorn_tol, "flow.options");
      sc.bridge.max_iter = int_or(opts, "max_iter", sc.bridge.max_iter, "flow.options");
      if (opts.contains("force_log_domain")) sc.bridge.force_log_domain = opts["force_log_domain"].get<bool>();
      break;
    case Family::Mfg:
      allow_keys(opts, {"damping", "fp_tol", "max_rounds", "max_step", "cfl"}, "flow.options");
      if (!(sc.coeffs.sigma > 0.0)) config("mfg needs sigma > 0");
      sc.mfg.damping = num_or(opts, "damping", sc.mfg.damping, "flow.options");
      sc.mfg.fp_tol = num_or(opts, "fp_tol", sc.mfg.fp_tol, "flow.options");
      sc.mfg.max_rounds = int_or(opts, "max_rounds", sc.mfg.max_rounds, "flow.options");
      sc.mfg.max_step = num_or(opts, "max_step", sc.mfg.max_step, "flow.options");
      sc.mfg.cfl = num_or(opts, "cfl", sc.mfg.cfl, "flow.options");
      if (!(sc.mfg.damping > 0.0 && sc.mfg.damping <= 1.0)) config("mfg damping must lie in (0, 1]");
      break;
  }
  if (sc.family != Family::Bridge && !sc.rho1.is_null()) config("rho1 is only used by the bridge family");
  // Validate descriptors before any solve.
  build_density(sc.rho0, sc.grid, base_dir);
  if (!sc.rho1.is_null()) build_density(sc.rho1, sc.grid, base_dir);
  build_phase(sc.theta0, sc.grid);
  build_phase(sc.u_tau, sc.grid);

  sc.seed = doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : 1;
  sc.output = doc.value("output", "out/" + sc.name);

  const json js = doc.value("series", json::object());
  allow_keys(js, {"form_tol", "seam_tol"}, "series");
  sc.series.form_tol = num_or(js, "form_tol", sc.series.form_tol, "series");
  sc.series.seam_tol = num_or(js, "seam_tol", sc.series.seam_tol, "series");

  const json jfl = doc.value("faults", json::object());
  allow_keys(jfl, {"theta_sign_flip", "theta_perturb"}, "faults");
  sc.faults.theta_sign_flip = jfl.value("theta_sign_flip", false);
  sc.faults.theta_perturb = jfl.value("theta_perturb", false);

  for (const auto& c : doc.value("checkers", json::array())) {
    CheckerSpec cs;
    if (c.is_string()) {
      cs.name = c.get<std::string>();
    } else {
      if (!c.is_object() || !c.contains("name")) config("checker entries are names or objects with 'name'");
      cs.name = c["name"].get<std::string>();
      cs.tol = num_or(c, "tol", 0.0, "checker " + cs.name);
      cs.params = c;
      cs.params.erase("name");
      cs.params.erase("tol");
    }
    std::set<std::string> allowed;
    if (cs.name == "longtime") allowed = {"taus", "samples", "envelope_step"};
    else if (cs.name == "evi") allowed = {"t_grid", "fd_step", "samples"};
    else if (cs.name == "contraction") allowed = {"tau_heat", "n_steps", "samples"};
    else if (!kSeriesCheckers.count(cs.name)) config("unknown checker '" + cs.name + "'");
    if (cs.params.is_null()) cs.params = json::object();
    allow_keys(cs.params, allowed, "checker " + cs.name);
    sc.checkers.push_back(cs);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::exception& e) {
    config(path + ": " + e.what());
  } catch (const Error& e) {
    config(e.what());
  }
  try {
    return parse_scenario(doc, fs::path(path).parent_path().string().empty() ? "."
                                                                             : fs::path(path).parent_path().string());
  } catch (const json::exception& e) {
    config(path + ": " + e.what());
  }
}

FlowTrajectory build_flow(const Scenario& sc) {
  const Grid& g = sc.grid;
  std::vector<double> times = uniform_times(sc.tau, sc.samples);
  FlowTrajectory tr;
  switch (sc.family) {
    case Family::Stationary: {
      tr.grid = g;
      tr.times = times;
      tr.coeffs = sc.coeffs;
      tr.family = Family::Stationary;
      Density rho = build_density(sc.rho0, g, sc.base_dir);
      for (std::size_t k = 0; k < times.size(); ++k) tr.snaps.push_back({rho, Phase::zero(g)});
      stamp_hypotheses(tr);
      break;
    }
    case Family::Heat:
      tr = heat_flow(build_density(sc.rho0, g, sc.base_dir), sc.coeffs.sigma, times);
      break;
    case Family::ZeroViscosity: {
      LogDensity ld;
      if (sc.rho0.value("kind", "") == "gaussian")
        ld = LogDensity::gaussian(g, get_vec(sc.rho0["mean"], g.dim, "mean"), get_mat(sc.rho0["cov"], g.dim, "cov"));
      else
        ld = LogDensity::from_density(build_density(sc.rho0, g, sc.base_dir));
      tr = zero_viscosity_integrate(ld, build_phase(sc.theta0, g), sc.coeffs, times, sc.zv);
      break;
    }
    case Family::Bridge:
      tr = schrodinger_bridge(build_density(sc.rho0, g, sc.base_dir), build_density(sc.rho1, g, sc.base_dir),
                              sc.coeffs.sigma, times, sc.bridge);
      break;
    case Family::Mfg:
      tr = mfg_picard(build_density(sc.rho0, g, sc.base_dir), build_phase(sc.u_tau, g), sc.coeffs, times, sc.mfg);
      break;
  }
  if (sc.faults.theta_sign_flip) {
    for (auto& s : tr.snaps) {
      s.theta = s.theta.negated();
      s.theta.gauge_fix(s.rho);
    }
    tr.log.push_back("fault injected: theta sign flip");
  }
  if (sc.faults.theta_perturb) {
    Snapshot& s = tr.snaps[tr.snaps.size() / 2];
    for (std::size_t p = 0; p < g.size(); ++p) s.theta.smooth[p] += 0.1 * std::sin(2.0 * M_PI * g.point(p)[0] / g.extent[0]);
    s.theta.gauge_fix(s.rho);
    tr.log.push_back("fault injected: theta perturbed at t=" + std::to_string(tr.times[tr.snaps.size() / 2]));
  }
  tr.residual = pde_residual(tr);
  return tr;
}

std::vector<CheckReport> run_checkers(const Scenario& sc, const FlowTrajectory& traj, const FunctionalSeries& series,
                                      int threads) {
  std::vector<CheckReport> out(sc.checkers.size());
  parallel_run(static_cast<int>(sc.checkers.size()), threads, [&](int i) {
    const CheckerSpec& cs = sc.checkers[i];
    CheckOptions opt;
    opt.tol = cs.tol;
    opt.seed = sc.seed;
    const std::string& n = cs.name;
    if (n == "T_inequality") out[i] = check_T_inequality(series, opt);
    else if (n == "S_inequality") out[i] = check_S_inequality(series, opt);
    else if (n == "entropy_growth") out[i] = check_entropy_growth(series, opt);
    else if (n == "turnpike") out[i] = check_turnpike(series, opt);
    else if (n == "energy") out[i] = check_energy(series, opt);
    else if (n == "matrix_energy") out[i] = check_matrix_energy(series, opt);
    else if (n == "cost_identity") out[i] = check_cost_identity(series, opt);
    else if (n == "cost_inequality") out[i] = check_cost_inequality(series, opt);
    else if (n == "time_symmetry") out[i] = check_time_symmetry(traj, opt);
    else if (n == "residual") out[i] = check_residual(traj, opt);
    else {
      if (sc.family != Family::Bridge) {
        CheckReport r;
        r.name = n;
        r.seed = sc.seed;
        r.refuse("needs the marginals of a bridge scenario");
        r.finalize();
        out[i] = r;
        return;
      }
      BridgePair pair{build_density(sc.rho0, sc.grid, sc.base_dir), build_density(sc.rho1, sc.grid, sc.base_dir)};
      const json& p = cs.params;
      if (n == "longtime") {
        LongtimeSetup st;
        st.sigma = sc.coeffs.sigma;
        st.bridge = sc.bridge;
        if (p.contains("taus")) st.taus = p["taus"].get<std::vector<double>>();
        st.samples = int_or(p, "samples", st.samples, "longtime");
        st.envelope_step = num_or(p, "envelope_step", st.envelope_step, "longtime");
        out[i] = check_longtime(pair, st, opt);
      } else if (n == "evi") {
        EviSetup st;
        st.bridge = sc.bridge;
        if (p.contains("t_grid")) st.t_grid = p["t_grid"].get<std::vector<double>>();
        st.fd_step = num_or(p, "fd_step", st.fd_step, "evi");
        st.samples = int_or(p, "samples", st.samples, "evi");
        out[i] = check_evi(pair, st, opt);
      } else {
        ContractionSetup st;
        st.bridge = sc.bridge;
        st.tau_heat = num_or(p, "tau_heat", st.tau_heat, "contraction");
        st.n_steps = int_or(p, "n_steps", st.n_steps, "contraction");
        st.samples = int_or(p, "samples", st.samples, "contraction");
        out[i] = check_contraction(pair, st, opt);
      }
    }
  });
  return out;
}

Scenario refined_scenario(const Scenario& sc, int factor) {
  if (factor < 1) config("refine factor must be >= 1");
  auto check_file = [](const json& d) {
    if (d.is_object() && d.value("kind", "") == "file") config("file descriptors cannot be refined");
  };
  check_file(sc.rho0);
  check_file(sc.rho1);
  Scenario r = sc;
  std::array<double, 3> e = sc.grid.extent;
  std::array<int, 3> n = sc.grid.points;
  for (int a = 0; a < sc.grid.dim; ++a) n[a] *= factor;
  r.grid = Grid::make(sc.grid.dim, e, n);
  r.samples = (sc.samples - 1) * factor + 1;
  r.bridge.sinkhorn_tol = sc.bridge.sinkhorn_tol / 10.0;
  r.mfg.fp_tol = sc.mfg.fp_tol / 10.0;
  r.mfg.max_step = sc.mfg.max_step / factor;
  r.zv.cfl = sc.zv.cfl / factor;
  // Gridded coefficients are re-parsed on the finer grid.
  const json jc = sc.source.value("coefficients", json::object());
  r.coeffs.U = parse_U(jc.value("U", json::object()), r.grid, sc.base_dir);
  r.coeffs.W = parse_W(jc.value("W", json::object()), r.grid, sc.base_dir);
  return r;
}

}  // namespace dflow
