#include "cohspace/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "cohspace/catalog.hpp"
#include "cohspace/causal.hpp"
#include "cohspace/dynamics.hpp"
#include "cohspace/errors.hpp"
#include "cohspace/kernel.hpp"
#include "cohspace/lie.hpp"
#include "cohspace/quantization.hpp"
#include "cohspace/quantum_space.hpp"
#include "cohspace/spectra.hpp"

#ifndef COHSPACE_VERSION
#define COHSPACE_VERSION "dev"
#endif

namespace cohspace {

namespace {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- parsing helpers

const json& need(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
  return cfg.at(key);
}

cd parse_cd(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError("expected a number or [re, im], got " + j.dump());
}

VecC parse_vec(const json& j) {
  if (!j.is_array()) throw ConfigError("expected an array, got " + j.dump());
  VecC v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_cd(j[i]);
  return v;
}

MatC parse_mat(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a matrix as a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatC m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const VecC row = parse_vec(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw ConfigError("matrix rows have different lengths");
    m.row(r) = row.transpose();
  }
  return m;
}

std::pair<double, double> parse_pair(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(std::string(what) + " must be [a, b]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json cjson(cd v) { return json::array({v.real(), v.imag()}); }

json mat_json(const MatC& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cjson(m(r, c)));
    out.push_back(row);
  }
  return out;
}

KernelSpace parse_space(const json& cfg) {
  try {
    return space_from_json(need(cfg, "space"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Point parse_point(const json& j) {
  try {
    return point_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t seed_of(const json& cfg) { return cfg.value("seed", std::uint64_t{0}); }

// Explicit "points", or "sample": count drawn with the run seed.
PointList parse_points(const json& cfg, const KernelSpace& space) {
  if (cfg.contains("points")) {
    try {
      return points_from_json(cfg.at("points"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (cfg.contains("sample")) {
    const int count = cfg.at("sample").get<int>();
    if (count < 1) throw ConfigError("sample count must be positive");
    std::mt19937_64 rng(seed_of(cfg));
    return space.sample(rng, static_cast<std::size_t>(count));
  }
  throw ConfigError("config needs 'points' or 'sample'");
}

std::vector<double> parse_sample_times(const json& cfg, std::pair<double, double> span) {
  if (cfg.contains("sample_times")) return cfg.at("sample_times").get<std::vector<double>>();
  const int n = cfg.value("samples", 101);
  if (n < 2) throw ConfigError("samples must be at least 2");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = span.first + (span.second - span.first) * i / (n - 1);
  t.back() = span.second;
  return t;
}

FlowOptions parse_flow_options(const json& cfg, std::pair<double, double> span) {
  FlowOptions o;
  o.ode.rtol = cfg.value("rtol", o.ode.rtol);
  o.ode.atol = cfg.value("atol", o.ode.atol);
  o.hbar = cfg.value("hbar", o.hbar);
  o.energy_drift_tol = cfg.value("energy_drift_tol", o.energy_drift_tol);
  o.gradient_step = cfg.value("gradient_step", o.gradient_step);
  o.sample_times = parse_sample_times(cfg, span);
  return o;
}

ExpectationFunction parse_energy(const json& j, const KernelSpace& space) {
  const auto type = j.value("type", std::string("linear"));
  if (type == "linear") return linear_energy(space, parse_mat(need(j, "hamiltonian")));
  if (type == "spin_quadratic") {
    Eigen::Vector3d a = Eigen::Vector3d::Zero();
    Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
    if (j.contains("a")) {
      const auto v = j.at("a").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("spin_quadratic 'a' needs 3 entries");
      a = Eigen::Vector3d(v[0], v[1], v[2]);
    }
    if (j.contains("q")) {
      const auto rows = j.at("q").get<std::vector<std::vector<double>>>();
      if (rows.size() != 3) throw ConfigError("spin_quadratic 'q' must be 3x3");
      for (int r = 0; r < 3; ++r) {
        if (rows[static_cast<std::size_t>(r)].size() != 3) throw ConfigError("spin_quadratic 'q' must be 3x3");
        for (int c = 0; c < 3; ++c) q(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
    }
    return spin_quadratic_energy(need(j, "n").get<double>(), a, q, j.value("c", 0.0));
  }
  throw ConfigError("unknown energy type '" + type + "' (linear, spin_quadratic)");
}

// ---- output helpers

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { line(header); }
  void row(const std::vector<double>& v) {
    std::vector<std::string> s;
    for (double x : v) s.push_back(format_number(x));
    line(s);
  }
  void row(const std::vector<std::string>& v) { line(v); }
  std::string str() const { return os_.str(); }

 private:
  void line(const std::vector<std::string>& v) {
    if (v.size() != cols_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? "," : "") << v[i];
    os_ << '\n';
  }
  std::size_t cols_;
  std::ostringstream os_;
};

json result(json payload, std::string csv, json warnings = json::array(), json summary = json::object()) {
  return {{"payload", std::move(payload)}, {"csv", std::move(csv)}, {"warnings", std::move(warnings)},
          {"summary", std::move(summary)}};
}

std::string matrix_csv(const MatC& m) {
  Csv c({"i", "j", "re", "im"});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      c.row({static_cast<double>(i), static_cast<double>(j), m(i, j).real(), m(i, j).imag()});
  return c.str();
}

std::string trajectory_csv(const Trajectory& tr, int dim) {
  std::vector<std::string> h{"t"};
  for (int k = 0; k < dim; ++k) {
    h.push_back("re_z" + std::to_string(k));
    h.push_back("im_z" + std::to_string(k));
  }
  h.push_back("energy");
  h.push_back("norm");
  Csv c(h);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    std::vector<double> r{tr.times[i]};
    for (int k = 0; k < dim; ++k) {
      r.push_back(tr.points[i].coords(k).real());
      r.push_back(tr.points[i].coords(k).imag());
    }
    r.push_back(i < tr.energy.size() ? tr.energy[i] : std::numeric_limits<double>::quiet_NaN());
    r.push_back(i < tr.norm.size() ? tr.norm[i] : std::numeric_limits<double>::quiet_NaN());
    c.row(r);
  }
  return c.str();
}

json trajectory_json(const Trajectory& tr) {
  return {{"times", tr.times},
          {"points", points_to_json(tr.points)},
          {"energy", tr.energy},
          {"norm", tr.norm},
          {"steps", tr.stats.steps},
          {"rejected", tr.stats.rejected},
          {"energy_drift", tr.energy_drift},
          {"norm_drift", tr.norm_drift}};
}

// ---- commands

json cmd_kernel_eval(const json& cfg, int) {
  const auto space = parse_space(cfg);
  const cd v = eval_kernel(space, parse_point(need(cfg, "z")), parse_point(need(cfg, "z2")));
  Csv c({"re", "im"});
  c.row({v.real(), v.imag()});
  return result({{"re", v.real()}, {"im", v.imag()}}, c.str());
}

json cmd_kernel_gram(const json& cfg, int threads) {
  const auto space = parse_space(cfg);
  const auto pts = parse_points(cfg, space);
  const MatC g = gram_matrix(space, pts, threads);
  return result({{"points", points_to_json(pts)}, {"gram", mat_json(g)}}, matrix_csv(g));
}

json cmd_kernel_check(const json& cfg, int) {
  const auto space = parse_space(cfg);
  const auto pts = parse_points(cfg, space);
  const auto v = check_coherence(space, pts, cfg.value("tol", 1e-8));
  Csv c({"points", "min_eigenvalue", "gram_norm", "passed", "tolerance_used"});
  c.row({std::to_string(pts.size()), format_number(v.min_eigenvalue), format_number(v.gram_norm),
         v.passed ? "true" : "false", format_number(v.tolerance_used)});
  json p{{"points", pts.size()},
         {"min_eigenvalue", v.min_eigenvalue},
         {"gram_norm", v.gram_norm},
         {"passed", v.passed},
         {"tolerance_used", v.tolerance_used}};
  return result(p, c.str(), json::array(), {{"passed", v.passed}});
}

json cmd_qspace_build(const json& cfg, int) {
  const auto space = parse_space(cfg);
  const auto qb = build_quantum_space(space, parse_points(cfg, space), cfg.value("tol", 1e-10), cfg.value("psd_tol", 1e-8));
  Csv c({"k", "eigenvalue"});
  for (Eigen::Index k = 0; k < qb.eigenvalues.size(); ++k) c.row({static_cast<double>(k), qb.eigenvalues(k)});
  return result(qb.to_json(), c.str(), json::array(), {{"rank", qb.rank}});
}

json cmd_quantize(const json& cfg, int) {
  const auto space = parse_space(cfg);
  const auto qb = build_quantum_space(space, parse_points(cfg, space), cfg.value("basis_tol", 1e-10));
  QuantizedOperator op;
  std::string kind;
  if (cfg.contains("map")) {
    kind = "map";
    op = quantize_map(qb, linear_map(space, parse_mat(cfg.at("map"))), cfg.value("tol", 1e-8));
  } else if (cfg.contains("generator")) {
    kind = "generator";
    GeneratorSpec g = linear_generator(space, parse_mat(cfg.at("generator")));
    if (!cfg.value("analytic", true)) g.analytic_derivative = nullptr;
    op = generator_matrix(qb, g, cfg.value("step", 1e-4), cfg.value("tol", 1e-8));
  } else {
    throw ConfigError("quantize needs 'map' or 'generator'");
  }
  json p{{"kind", kind}, {"rank", qb.rank}, {"residual", op.residual}, {"matrix", mat_json(op.matrix)}};
  return result(p, matrix_csv(op.matrix), json::array(), {{"rank", qb.rank}, {"residual", op.residual}});
}

json cmd_dyn_coherent(const json& cfg, int) {
  const auto space = parse_space(cfg);
  const auto span = parse_pair(need(cfg, "t_span"), "t_span");
  const auto opt = parse_flow_options(cfg, span);
  const auto flow = LinearHamiltonianFlow::constant(parse_mat(need(cfg, "hamiltonian")), opt.hbar);
  const auto tr = coherent_flow(space, flow, parse_point(need(cfg, "z0")), span, opt);
  return result(trajectory_json(tr), trajectory_csv(tr, space.label_dim()), json::array(),
                {{"steps", tr.stats.steps}, {"norm_drift", tr.norm_drift}});
}

json cmd_dyn_tdvp(const json& cfg, int) {
  const auto space = parse_space(cfg);
  const auto span = parse_pair(need(cfg, "t_span"), "t_span");
  const auto opt = parse_flow_options(cfg, span);
  const auto tr = dirac_frenkel_flow(space, parse_energy(need(cfg, "energy"), space), parse_point(need(cfg, "z0")), span, opt);
  return result(trajectory_json(tr), trajectory_csv(tr, space.label_dim()), json::array(),
                {{"steps", tr.stats.steps}, {"energy_drift", tr.energy_drift}, {"norm_drift", tr.norm_drift}});
}

Point initial_spin_point(const json& cfg) {
  if (cfg.contains("z0")) return parse_point(cfg.at("z0"));
  const double th = cfg.value("theta", 1.0), ph = cfg.value("phi", 0.7);
  return Point{std::cos(th / 2), std::polar(std::sin(th / 2), ph)};
}

json cmd_dyn_lyapunov(const json& cfg, int) {
  LyapunovResult r;
  FlowOptions opt;
  opt.ode.rtol = cfg.value("rtol", opt.ode.rtol);
  opt.ode.atol = cfg.value("atol", opt.ode.atol);
  const auto protocol = cfg.value("protocol", std::string("kicked_top"));
  if (protocol == "kicked_top") {
    const double n = cfg.value("n", 20.0);
    const auto prot = kicked_top_protocol(n, need(cfg, "k").get<double>(), cfg.value("p", std::numbers::pi / 2),
                                          cfg.value("haake", false));
    const int periods = cfg.value("periods", 400);
    r = lyapunov_protocol(spin_space(n), prot, initial_spin_point(cfg), periods, opt);
  } else if (protocol == "flow") {
    const auto space = parse_space(cfg);
    opt.hbar = cfg.value("hbar", 1.0);
    r = lyapunov_max(space, parse_energy(need(cfg, "energy"), space), parse_point(need(cfg, "z0")),
                     need(cfg, "t_total").get<double>(), cfg.value("renorm_dt", 1.0), opt);
  } else {
    throw ConfigError("unknown lyapunov protocol '" + protocol + "' (kicked_top, flow)");
  }
  Csv c({"t", "estimate"});
  json series = json::array();
  for (const auto& [t, v] : r.series) {
    c.row({t, v});
    series.push_back({t, v});
  }
  json p{{"lambda", r.lambda}, {"lambda_tail", r.lambda_tail}, {"lambda_per_period", r.lambda_per_period},
         {"series", series}};
  return result(p, c.str(), json::array(),
                {{"lambda_max", r.lambda}, {"lambda_tail", r.lambda_tail}, {"lambda_per_period", r.lambda_per_period}});
}

json cmd_spec_solve(const json& cfg, int threads) {
  ImplicitSpectralModel model;
  try {
    model = model_from_json(need(cfg, "model"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  SpectrumOptions o;
  o.grid = cfg.value("grid", o.grid);
  o.threads = threads;
  const auto r = solve_implicit_spectrum(model, parse_pair(need(cfg, "interval"), "interval"), cfg.value("tol", 1e-10), o);
  Csv c({"n", "E", "residual"});
  for (const auto& x : r.discrete) c.row({std::to_string(x.n), format_number(x.energy), format_number(x.residual)});
  json bands = json::array();
  for (const auto& [a, b] : r.continuous) bands.push_back({a, b});
  return result(spectrum_to_json(r), c.str(), r.warnings, {{"roots", r.discrete.size()}, {"continuous", bands}});
}

std::pair<LieStarAlgebra, AlgebraRep> parse_algebra(const json& j) {
  if (j.is_string() || j.contains("named")) {
    const auto name = j.is_string() ? j.get<std::string>() : j.at("named").get<std::string>();
    const json o = j.is_object() ? j : json::object();
    if (name == "qubit") return qubit_algebra(o.value("hbar", 1.0));
    if (name == "rotator") return rotator_algebra(o.value("n", 2));
    if (name == "koopman") return koopman_algebra(o.value("modes", 1), o.value("grid", 16), o.value("action", 1.0));
    throw ConfigError("unknown algebra '" + name + "' (qubit, rotator, koopman)");
  }
  AlgebraRep rep;
  for (const auto& m : need(j, "matrices")) rep.push_back(parse_mat(m));
  const auto names = need(j, "names").get<std::vector<std::string>>();
  if (j.contains("structure")) {
    try {
      auto alg = LieStarAlgebra::from_json(j);
      if (rep.size() != names.size()) throw ConfigError("need one matrix per basis element");
      return {alg, rep};
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return {algebra_from_matrices(names, rep, j.value("unit", 0), j.value("hbar", 1.0)), rep};
}

VecC parse_element(const LieStarAlgebra& alg, const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    for (int a = 0; a < alg.dim(); ++a)
      if (alg.names[static_cast<std::size_t>(a)] == name) return alg.basis(a);
    throw ConfigError("algebra has no basis element '" + name + "'");
  }
  VecC v = parse_vec(j);
  if (v.size() != alg.dim()) throw ConfigError("coefficient vector does not match the algebra dimension");
  return v;
}

json cmd_lie_evolve(const json& cfg, int) {
  const auto [alg, rep] = parse_algebra(need(cfg, "algebra"));
  const VecC h = parse_element(alg, need(cfg, "hamiltonian"));
  const MatC rho = parse_mat(need(cfg, "rho"));
  std::vector<VecC> obs;
  std::vector<std::string> labels;
  for (const auto& o : need(cfg, "observables")) {
    obs.push_back(parse_element(alg, o));
    labels.push_back(o.is_string() ? o.get<std::string>() : "o" + std::to_string(labels.size()));
  }
  const auto span = parse_pair(need(cfg, "t_span"), "t_span");
  const auto tab = evolve_expectations(alg, rep, h, {rho}, obs, span, cfg.value("rtol", 1e-10), parse_sample_times(cfg, span));
  std::vector<std::string> head{"t"};
  for (const auto& l : labels) {
    head.push_back("re_" + l);
    head.push_back("im_" + l);
  }
  Csv c(head);
  json values = json::array();
  for (std::size_t i = 0; i < tab.times.size(); ++i) {
    std::vector<double> r{tab.times[i]};
    json row = json::array();
    for (Eigen::Index k = 0; k < tab.values[i].size(); ++k) {
      r.push_back(tab.values[i](k).real());
      r.push_back(tab.values[i](k).imag());
      row.push_back(cjson(tab.values[i](k)));
    }
    c.row(r);
    values.push_back(row);
  }
  json gap = tab.von_neumann_gap ? json(*tab.von_neumann_gap) : json(nullptr);
  json p{{"algebra", alg.to_json()}, {"observables", labels}, {"times", tab.times},
         {"values", values},         {"closure", mat_json(tab.closure)}, {"von_neumann_gap", gap}};
  return result(p, c.str(), json::array(), {{"von_neumann_gap", gap}});
}

CausalSection parse_section(const json& j) {
  CausalSection s;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() < 3 || e.size() > 4) throw ConfigError("section entries are [t, x, re] or [t, x, re, im]");
    s.set({e[0].get<int>(), e[1].get<int>()}, {e[2].get<double>(), e.size() == 4 ? e[3].get<double>() : 0.0});
  }
  return s;
}

json cmd_causal_check(const json& cfg, int) {
  std::vector<CausalTriple> triples;
  for (const auto& t : need(cfg, "triples")) {
    CausalTriple c;
    const auto cond = t.value("condition", std::string("normal"));
    if (cond == "normal")
      c.condition = CausalTriple::Condition::Normal;
    else if (cond == "causal")
      c.condition = CausalTriple::Condition::Causal;
    else
      throw ConfigError("triple condition must be 'normal' or 'causal'");
    c.j = parse_section(need(t, "j"));
    c.j2 = parse_section(need(t, "j2"));
    if (t.contains("k")) c.k = parse_section(t.at("k"));
    triples.push_back(std::move(c));
  }
  const auto v = check_causal_conditions(lattice_weyl_kernel(cfg.value("mass", 0.0)), lattice_lightcone_independent,
                                         triples, cfg.value("tol", 1e-12));
  Csv c({"normal_max", "causal_max", "normal_cases", "causal_cases", "passed"});
  c.row({format_number(v.normal_max), format_number(v.causal_max), std::to_string(v.normal_cases),
         std::to_string(v.causal_cases), v.passed() ? "true" : "false"});
  json p{{"normal_max", v.normal_max},     {"causal_max", v.causal_max},       {"normal_cases", v.normal_cases},
         {"causal_cases", v.causal_cases}, {"normal_passed", v.normal_passed}, {"causal_passed", v.causal_passed},
         {"passed", v.passed()}};
  return result(p, c.str(), json::array(), {{"passed", v.passed()}});
}

using Command = std::function<json(const json&, int)>;

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"kernel-eval", cmd_kernel_eval},   {"kernel-gram", cmd_kernel_gram},   {"kernel-check", cmd_kernel_check},
      {"qspace-build", cmd_qspace_build}, {"quantize", cmd_quantize},         {"dyn-coherent", cmd_dyn_coherent},
      {"dyn-tdvp", cmd_dyn_tdvp},         {"dyn-lyapunov", cmd_dyn_lyapunov}, {"spec-solve", cmd_spec_solve},
      {"lie-evolve", cmd_lie_evolve},     {"causal-check", cmd_causal_check},
  };
  return table;
}

// ---- driver

json parse_flag_value(const std::string& s) {
  try {
    return json::parse(s);
  } catch (const json::parse_error&) {
    return s;
  }
}

void set_path(json& cfg, const std::string& key, json value) {
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("bad --set key '" + key + "'");
    if (!node->is_object()) throw ConfigError("--set key '" + key + "' goes through a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::pair<double, double> split_pair(const std::string& s, const char* what) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ConfigError(std::string(what) + " must be 'a,b'");
  double a = 0, b = 0;
  const auto* first = s.data();
  const auto* mid = s.data() + comma;
  const auto* last = s.data() + s.size();
  auto r1 = std::from_chars(first, mid, a);
  auto r2 = std::from_chars(mid + 1, last, b);
  if (r1.ec != std::errc() || r1.ptr != mid || r2.ec != std::errc() || r2.ptr != last)
    throw ConfigError(std::string(what) + " must be 'a,b' with numbers");
  return {a, b};
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + tmp);
    f << text;
    f.flush();
    if (!f) throw ConfigError("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string error_json(const std::string& kind, const std::string& message, int code) {
  return json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump();
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> cli_commands() {
  std::vector<std::string> out;
  for (const auto& [name, _] : commands()) out.push_back(name);
  return out;
}

json run_command(const std::string& command, const json& config, int threads) {
  const auto it = commands().find(command);
  if (it == commands().end()) throw ConfigError("unknown command '" + command + "'");
  return it->second(config, threads);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cohspace: coherent spaces, quantization, dynamics, spectra and Lie-state tools", "cohspace"};
  app.require_subcommand(1);
  app.set_version_flag("--version", COHSPACE_VERSION);

  struct Flags {
    std::string config, out, report, format = "csv";
    std::vector<std::string> sets;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::string space, model, interval, t_span, z, z2;
  } f;

  static const std::map<std::string, std::string> blurbs{
      {"kernel-eval", "kernel value K(z, z2)"},
      {"kernel-gram", "Gram matrix of a point set"},
      {"kernel-check", "positivity verdict for a point set"},
      {"qspace-build", "quantum space basis from a point set"},
      {"quantize", "operator of a coherent map or generator"},
      {"dyn-coherent", "exact coherent flow of a linear Hamiltonian"},
      {"dyn-tdvp", "Dirac-Frenkel flow of an energy function"},
      {"dyn-lyapunov", "largest Lyapunov exponent (kicked top or flow)"},
      {"spec-solve", "roots of an implicit spectral model"},
      {"lie-evolve", "Ehrenfest evolution of expectations"},
      {"causal-check", "normal and causal conditions on lattice triples"},
  };
  for (const auto& name : cli_commands()) {
    const auto b = blurbs.find(name);
    auto* sub = app.add_subcommand(name, b == blurbs.end() ? std::string() : b->second);
    sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", f.sets, "override a config field: key.path=value (value parsed as JSON if possible)");
    sub->add_option("--out", f.out, "payload file (default: standard output)");
    sub->add_option("--report", f.report, "run report file (default: <out>.report.json or standard error)");
    sub->add_option("--format", f.format, "payload format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", f.threads, "worker threads (env COHSPACE_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", f.seed, "random seed for sampled points (default 0)");
    sub->add_option("--tol", f.tol, "tolerance");
    sub->add_option("--space", f.space, "space descriptor as JSON");
    sub->add_option("--model", f.model, "spectral model as JSON");
    sub->add_option("--interval", f.interval, "energy interval a,b");
    sub->add_option("--t-span", f.t_span, "time span a,b");
    sub->add_option("--z", f.z, "first point as JSON");
    sub->add_option("--z2", f.z2, "second point as JSON");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << COHSPACE_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << error_json("config", e.what(), kExitConfig) << '\n';
    return kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  const auto started = std::chrono::steady_clock::now();
  json config = json::object();
  int threads = 1;
  json res;
  try {
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      if (!in) throw ConfigError("cannot read " + f.config);
      try {
        config = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(f.config + ": " + e.what());
      }
      if (!config.is_object()) throw ConfigError("config must be a JSON object");
    }
    if (config.contains("command") && config.at("command") != command)
      throw ConfigError("config is for '" + config.at("command").get<std::string>() + "', not '" + command + "'");
    config.erase("command");
    auto parse_json_flag = [](const std::string& s, const char* what) {
      try {
        return json::parse(s);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
      }
    };
    if (!f.space.empty()) config["space"] = parse_json_flag(f.space, "--space");
    if (!f.model.empty()) config["model"] = parse_json_flag(f.model, "--model");
    if (!f.z.empty()) config["z"] = parse_json_flag(f.z, "--z");
    if (!f.z2.empty()) config["z2"] = parse_json_flag(f.z2, "--z2");
    if (!f.interval.empty()) {
      const auto [a, b] = split_pair(f.interval, "--interval");
      config["interval"] = {a, b};
    }
    if (!f.t_span.empty()) {
      const auto [a, b] = split_pair(f.t_span, "--t-span");
      config["t_span"] = {a, b};
    }
    if (f.tol) config["tol"] = *f.tol;
    for (const auto& s : f.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      set_path(config, s.substr(0, eq), parse_flag_value(s.substr(eq + 1)));
    }
    if (f.seed) config["seed"] = *f.seed;
    if (!config.contains("seed")) config["seed"] = std::uint64_t{0};
    if (!config["seed"].is_number_integer() || config["seed"].get<std::int64_t>() < 0)
      throw ConfigError("seed must be a non-negative integer");

    if (f.threads) {
      threads = *f.threads;
    } else if (const char* env = std::getenv("COHSPACE_THREADS"); env && *env) {
      const std::string s(env);
      auto r = std::from_chars(s.data(), s.data() + s.size(), threads);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size() || threads < 1)
        throw ConfigError("COHSPACE_THREADS must be a positive integer");
    } else {
      threads = config.value("threads", 1);
    }
    if (threads < 1) throw ConfigError("threads must be positive");

    res = run_command(command, config, threads);
  } catch (const ConfigError& e) {
    err << error_json("config", e.what(), kExitConfig) << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << error_json("config", e.what(), kExitConfig) << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << error_json(e.kind(), e.what(), kExitDomain) << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << error_json("internal", e.what(), kExitDomain) << '\n';
    return kExitDomain;
  }

  const std::string payload = f.format == "json" ? res.at("payload").dump(2) + "\n" : res.at("csv").get<std::string>();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json report{{"command", command},
              {"version", COHSPACE_VERSION},
              {"config", config},
              {"threads", threads},
              {"format", f.format},
              {"wall_time_s", wall},
              {"warnings", res.at("warnings")},
              {"summary", res.at("summary")},
              {"payload", f.out.empty() ? "stdout" : f.out}};
  try {
    if (f.out.empty())
      out << payload;
    else
      write_atomic(f.out, payload);
    const std::string report_path = !f.report.empty() ? f.report : (f.out.empty() ? "" : f.out + ".report.json");
    if (report_path.empty())
      err << report.dump() << '\n';
    else
      write_atomic(report_path, report.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << error_json("io", e.what(), kExitDomain) << '\n';
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace cohspace
