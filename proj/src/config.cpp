#include "vhc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "vhc/error.hpp"
#include "vhc/expr.hpp"

namespace vhc {

using nlohmann::json;

namespace {

template <class T>
void get_if(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

std::vector<std::string> names(const std::string& sym, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sym + std::to_string(i + 1));
  return out;
}

// Matrix of expressions: array of row arrays, or a flat row-major array.
std::vector<std::string> expr_list(const json& j, const char* key, std::size_t rows, std::size_t cols) {
  if (!j.contains(key)) throw DomainError(std::string("system: missing '") + key + "'");
  const json& v = j.at(key);
  std::vector<std::string> out;
  auto push = [&](const json& e) {
    if (e.is_string())
      out.push_back(e.get<std::string>());
    else if (e.is_number())
      out.push_back(e.dump());
    else
      throw DomainError(std::string("system: entries of '") + key + "' must be strings or numbers");
  };
  if (v.is_array() && !v.empty() && v.front().is_array()) {
    for (const auto& row : v) {
      if (row.size() != cols) throw DimensionError(std::string("system: row of '") + key + "' has the wrong length");
      for (const auto& e : row) push(e);
    }
  } else if (v.is_array()) {
    for (const auto& e : v) push(e);
  } else {
    push(v);
  }
  if (out.size() != rows * cols)
    throw DimensionError(std::string("system: '") + key + "' needs " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " entries, got " + std::to_string(out.size()));
  return out;
}

Field field_of(const std::vector<std::string>& texts, const std::vector<std::string>& vars,
               const std::map<std::string, double>& consts, Shape shape) {
  std::vector<Expr> ex;
  for (const auto& t : texts) ex.push_back(Expr::parse(t, vars, consts));
  return expr_field(std::move(ex), vars.size(), shape);
}

}  // namespace

json to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["model"] = c.model;
  j["params"] = c.params;
  if (c.system) j["system"] = *c.system;
  j["grid"] = c.grid;
  if (c.tol) j["tol"] = *c.tol;
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["format"] = c.format;
  j["ic"] = c.ic;
  j["ics"] = c.ics;
  j["t1"] = c.t1;
  j["mode"] = c.mode;
  j["kp"] = c.kp;
  j["kd"] = c.kd;
  j["samples"] = c.samples;
  j["method"] = c.method;
  j["step"] = c.step;
  j["loop"] = c.loop;
  j["base"] = c.base;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("config: top level must be an object");
  static const std::set<std::string> known = {"command", "model", "params", "system", "grid",   "tol",
                                              "out",     "seed",  "format", "ic",     "ics",    "t1",
                                              "mode",    "kp",    "kd",     "samples", "method", "step",
                                              "loop",    "base"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw DomainError("config: unknown key '" + k + "'");
  RunConfig c;
  try {
    get_if(j, "command", c.command);
    get_if(j, "model", c.model);
    get_if(j, "params", c.params);
    if (j.contains("system") && !j.at("system").is_null()) c.system = j.at("system");
    get_if(j, "grid", c.grid);
    if (j.contains("tol") && !j.at("tol").is_null()) c.tol = j.at("tol").get<double>();
    get_if(j, "out", c.out);
    get_if(j, "seed", c.seed);
    get_if(j, "format", c.format);
    get_if(j, "ic", c.ic);
    get_if(j, "ics", c.ics);
    get_if(j, "t1", c.t1);
    get_if(j, "mode", c.mode);
    get_if(j, "kp", c.kp);
    get_if(j, "kd", c.kd);
    get_if(j, "samples", c.samples);
    get_if(j, "method", c.method);
    get_if(j, "step", c.step);
    get_if(j, "loop", c.loop);
    get_if(j, "base", c.base);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file '" + path + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DomainError("config '" + path + "': " + e.what());
  }
}

ModelBundle resolve_model(const RunConfig& cfg) {
  if (cfg.system) return model_from_json(*cfg.system, cfg.params);
  return make_model(cfg.model, cfg.params);
}

ModelBundle model_from_json(const json& j, const std::map<std::string, double>& params) {
  try {
    const std::size_t n = j.at("dim").get<std::size_t>();
    const std::size_t m = j.at("inputs").get<std::size_t>();
    if (n == 0 || m == 0 || m >= n) throw DimensionError("system: need 0 < inputs < dim");
    const std::size_t r = n - m;

    std::map<std::string, double> consts;
    get_if(j, "constants", consts);
    for (const auto& [k, v] : params) {
      if (!consts.count(k)) throw DomainError("system has no constant '" + k + "'");
      consts[k] = v;
    }
    const auto q = names("q", n);
    const auto t = names("t", r);

    ModelBundle b;
    b.name = j.value("name", std::string("custom"));
    b.params = consts;
    std::vector<bool> periodic(n, false);
    get_if(j, "periodic", periodic);
    if (periodic.size() != n) throw DimensionError("system: 'periodic' needs one flag per coordinate");
    b.system.chart = Chart::cylinder(periodic);
    b.system.inertia = field_of(expr_list(j, "inertia", n, n), q, consts, Shape{n, n});
    b.system.potential = field_of(expr_list(j, "potential", 1, 1), q, consts, Shape{1, 1});
    b.system.grad_potential = LagrangianControlSystem::gradient_of(b.system.potential);
    b.system.input = field_of(expr_list(j, "input", n, m), q, consts, Shape{n, m});
    b.system.annihilator = field_of(expr_list(j, "annihilator", r, n), q, consts, Shape{r, n});
    b.system.constraint = field_of(expr_list(j, "constraint", m, 1), q, consts, Shape{m, 1});
    b.parametrization.phi = field_of(expr_list(j, "phi", n, 1), t, consts, Shape{n, 1});

    json red = j.value("reduced", json::object());
    std::vector<bool> rper(r, false);
    get_if(red, "periodic", rper);
    if (rper.size() != r) throw DimensionError("system: reduced.periodic needs one flag per reduced coordinate");
    Chart chart = Chart::cylinder(rper);
    if (red.contains("lo")) chart.lo = red.at("lo").get<std::vector<double>>();
    if (red.contains("hi")) chart.hi = red.at("hi").get<std::vector<double>>();
    if (chart.lo.size() != r || chart.hi.size() != r) throw DimensionError("system: reduced bounds have the wrong size");
    b.parametrization.reduced = chart;

    for (const auto& g : j.value("generators", json::array())) {
      auto base = g.at("base").get<std::vector<double>>();
      auto axis = g.at("axis").get<std::size_t>();
      if (base.size() != r || axis >= r) throw DimensionError("system: bad generator");
      b.generators.push_back(LoopDescriptor::generator(base, axis, g.value("tag", "generator " + std::to_string(axis))));
    }
    b.grid_points = j.value("grid_points", std::size_t{9});
    b.grid_margin = j.value("grid_margin", 1e-2);
    return b;
  } catch (const json::exception& e) {
    throw DomainError(std::string("system: ") + e.what());
  }
}

}  // namespace vhc
