#include "lyapfix/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace lyapfix {

ConfigError::ConfigError(const std::string& path, const std::string& what)
    : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path) {}

double SweepSpec::value(int step) const {
  if (step == steps - 1) return to;
  return from + (to - from) * static_cast<double>(step) / static_cast<double>(steps - 1);
}

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json& require_object(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw ConfigError(path, "expected a JSON object");
  return doc;
}

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

double read_real(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key), "must be finite");
  return x;
}

long long read_integer(const json& obj, const std::string& key, const std::string& path, long long fallback,
                       long long lo, long long hi) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi)
    throw ConfigError(join(path, key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::string read_string(const json& obj, const std::string& key, const std::string& path, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

const std::set<std::string> kSweepParameters{"beta", "J1", "J3", "J", "alpha"};

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"model", "quadrature", "bounds", "solver", "tree", "sweep"});
  ExperimentConfig cfg;

  if (!doc.contains("model")) throw ConfigError("model", "required section missing");
  {
    const json& m = require_object(doc.at("model"), "model");
    reject_unknown(m, "model", {"J3", "J", "J1", "alpha", "beta", "xi1", "xi2", "xi3"});
    if (!m.contains("beta")) throw ConfigError("model.beta", "required field missing");
    cfg.J3 = read_real(m, "J3", "model", 0.0);
    cfg.J = read_real(m, "J", "model", 0.0);
    cfg.J1 = read_real(m, "J1", "model", 0.0);
    cfg.alpha = read_real(m, "alpha", "model", 0.0);
    cfg.beta = read_real(m, "beta", "model", 1.0);
    if (!(cfg.beta > 0.0)) throw ConfigError("model.beta", "must be positive");
    cfg.xi1 = read_string(m, "xi1", "model", "0");
    cfg.xi2 = read_string(m, "xi2", "model", "0");
    cfg.xi3 = read_string(m, "xi3", "model", "0");
  }

  if (doc.contains("quadrature")) {
    const json& q = require_object(doc.at("quadrature"), "quadrature");
    reject_unknown(q, "quadrature", {"nodes"});
    cfg.quadrature_nodes =
        static_cast<int>(read_integer(q, "nodes", "quadrature", cfg.quadrature_nodes, 1, kMaxQuadratureNodes));
  }

  if (doc.contains("bounds")) {
    const json& b = require_object(doc.at("bounds"), "bounds");
    reject_unknown(b, "bounds", {"grid", "refine"});
    cfg.bounds.grid = static_cast<int>(read_integer(b, "grid", "bounds", cfg.bounds.grid, 4, 1024));
    cfg.bounds.refine = static_cast<int>(read_integer(b, "refine", "bounds", cfg.bounds.refine, 0, 64));
  }

  if (doc.contains("solver")) {
    const json& s = require_object(doc.at("solver"), "solver");
    reject_unknown(s, "solver", {"tol", "max_iter", "damping", "starts", "seed", "cluster_eps", "newton_polish"});
    SolverConfig& sc = cfg.solver;
    sc.tol = read_real(s, "tol", "solver", sc.tol);
    sc.max_iter = static_cast<int>(read_integer(s, "max_iter", "solver", sc.max_iter, 0, 100000000));
    sc.damping = read_real(s, "damping", "solver", sc.damping);
    sc.starts = static_cast<int>(read_integer(s, "starts", "solver", sc.starts, 1, 1000000));
    if (s.contains("seed")) {
      const json& v = s.at("seed");
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw ConfigError("solver.seed", "expected a non-negative integer");
      sc.seed = v.get<std::uint64_t>();
    }
    sc.cluster_eps = read_real(s, "cluster_eps", "solver", sc.cluster_eps);
    if (s.contains("newton_polish")) {
      if (!s.at("newton_polish").is_boolean()) throw ConfigError("solver.newton_polish", "expected a boolean");
      sc.newton_polish = s.at("newton_polish").get<bool>();
    }
    if (!(sc.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
    if (!(sc.damping > 0.0 && sc.damping <= 1.0)) throw ConfigError("solver.damping", "must lie in (0, 1]");
    if (!(sc.cluster_eps > 0.0)) throw ConfigError("solver.cluster_eps", "must be positive");
    if (!(sc.tol < sc.cluster_eps)) throw ConfigError("solver.tol", "must be smaller than solver.cluster_eps");
  }

  if (doc.contains("tree")) {
    const json& t = require_object(doc.at("tree"), "tree");
    reject_unknown(t, "tree", {"k", "n", "quadrature_nodes"});
    cfg.tree.k = static_cast<int>(read_integer(t, "k", "tree", cfg.tree.k, 1, 64));
    cfg.tree.n = static_cast<int>(read_integer(t, "n", "tree", cfg.tree.n, 1, 64));
    cfg.tree.quadrature_nodes = static_cast<int>(
        read_integer(t, "quadrature_nodes", "tree", cfg.tree.quadrature_nodes, 1, kMaxQuadratureNodes));
  }

  if (doc.contains("sweep")) {
    const json& w = require_object(doc.at("sweep"), "sweep");
    reject_unknown(w, "sweep", {"parameter", "from", "to", "steps"});
    for (const char* key : {"parameter", "from", "to", "steps"})
      if (!w.contains(key)) throw ConfigError(join("sweep", key), "required field missing");
    SweepSpec sw;
    sw.parameter = read_string(w, "parameter", "sweep", "");
    if (!kSweepParameters.contains(sw.parameter))
      throw ConfigError("sweep.parameter", "must be one of beta, J1, J3, J, alpha");
    sw.from = read_real(w, "from", "sweep", 0.0);
    sw.to = read_real(w, "to", "sweep", 0.0);
    sw.steps = static_cast<int>(read_integer(w, "steps", "sweep", 2, 2, 100000));
    cfg.sweep = sw;
  }

  (void)cfg.model_params();  // surface expression errors at load time
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return from_json(doc);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json out;
  out["model"] = {{"J3", J3}, {"J", J},       {"J1", J1},   {"alpha", alpha},
                  {"beta", beta}, {"xi1", xi1}, {"xi2", xi2}, {"xi3", xi3}};
  out["quadrature"] = {{"nodes", quadrature_nodes}};
  out["bounds"] = {{"grid", bounds.grid}, {"refine", bounds.refine}};
  out["solver"] = {{"tol", solver.tol},
                   {"max_iter", solver.max_iter},
                   {"damping", solver.damping},
                   {"starts", solver.starts},
                   {"seed", solver.seed},
                   {"cluster_eps", solver.cluster_eps},
                   {"newton_polish", solver.newton_polish}};
  out["tree"] = {{"k", tree.k}, {"n", tree.n}, {"quadrature_nodes", tree.quadrature_nodes}};
  if (sweep)
    out["sweep"] = {{"parameter", sweep->parameter}, {"from", sweep->from}, {"to", sweep->to}, {"steps", sweep->steps}};
  return out;
}

ModelParams ExperimentConfig::model_params() const {
  ModelParams p;
  p.J3 = J3;
  p.J = J;
  p.J1 = J1;
  p.alpha = alpha;
  p.beta = beta;
  auto parse = [](const std::string& field, const std::string& src, VarSet vars) {
    try {
      return Expression::parse(src, vars);
    } catch (const ExprError& e) {
      throw ConfigError(field, e.what());
    }
  };
  p.xi1 = parse("model.xi1", xi1, {Variable::t, Variable::u, Variable::v});
  p.xi2 = parse("model.xi2", xi2, {Variable::u, Variable::v});
  p.xi3 = parse("model.xi3", xi3, {Variable::t, Variable::u});
  return p;
}

ExperimentConfig ExperimentConfig::with_parameter(const std::string& name, double value) const {
  ExperimentConfig c = *this;
  if (name == "beta")
    c.beta = value;
  else if (name == "J1")
    c.J1 = value;
  else if (name == "J3")
    c.J3 = value;
  else if (name == "J")
    c.J = value;
  else if (name == "alpha")
    c.alpha = value;
  else
    throw ConfigError("sweep.parameter", "unknown parameter '" + name + "'");
  return c;
}

}  // namespace lyapfix
