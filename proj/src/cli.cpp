#include "vhc/cli.hpp"

#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "vhc/analysis.hpp"
#include "vhc/config.hpp"
#include "vhc/error.hpp"
#include "vhc/report.hpp"
#include "vhc/sim.hpp"

namespace vhc {

using nlohmann::json;

namespace {

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("--param expects k=v, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != val.size()) throw DomainError("--param " + key + ": '" + val + "' is not a number");
    out[key] = v;
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("not a number list: '" + s + "'");
    }
  }
  return out;
}

std::string check_format(const std::string& f, const char* fallback) {
  const std::string v = f.empty() ? fallback : f;
  if (v != "csv" && v != "json") throw DomainError("--format must be csv or json");
  return v;
}

SimOptions sim_options(const RunConfig& cfg) {
  SimOptions so;
  so.ode.tol = cfg.tol.value_or(1e-10);
  so.samples = cfg.samples;
  if (cfg.method == "rk4") {
    so.ode.method = OdeMethod::rk4;
    so.ode.step = cfg.step;
  } else if (cfg.method != "rk45") {
    throw DomainError("--method must be rk45 or rk4");
  }
  return so;
}

// ---------------------------------------------------------------------------

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  const ModelBundle bundle = resolve_model(cfg);
  AnalysisOptions ao;
  ao.grid = cfg.grid;
  if (cfg.tol) ao.tol = *cfg.tol;
  ao.seed = cfg.seed;
  const AnalysisResult res = analyze(bundle, ao);
  const json j = report_json(res);
  if (cfg.format == "json")
    out << j.dump(2) << "\n";
  else
    out << report_text(res);
  if (output_dir_configured(cfg.out)) write_atomic(output_dir(cfg.out) / (bundle.name + "-report.json"), j.dump(2) + "\n");
  return res.lagrangian() ? kExitLagrangian : kExitNotLagrangian;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ModelBundle bundle = resolve_model(cfg);
  const SimOptions so = sim_options(cfg);
  const std::size_t r = bundle.parametrization.dim();
  const std::size_t n = bundle.system.dim();
  Trajectory tr;
  std::string cls;
  if (cfg.mode == "constrained") {
    std::vector<double> ic = cfg.ic;
    if (ic.empty()) {
      InitialCondition d = default_portrait_ics(bundle).front();
      ic = d.theta;
      ic.insert(ic.end(), d.theta_dot.begin(), d.theta_dot.end());
    }
    if (ic.size() != 2 * r)
      throw DimensionError("--ic needs " + std::to_string(2 * r) + " numbers (theta, theta_dot), got " +
                           std::to_string(ic.size()));
    // Energy needs the reconstructed structure; analysis failures only drop it.
    std::optional<AnalysisResult> res;
    try {
      AnalysisOptions ao;
      ao.grid = cfg.grid;
      ao.seed = cfg.seed;
      ao.el_states = 0;
      res = analyze(bundle, ao);
    } catch (const Error&) {
    }
    const LagrangianReport structure = res ? res->structure() : LagrangianReport{};
    std::span<const double> s(ic);
    tr = simulate_constrained(bundle, s.subspan(0, r), s.subspan(r, r), cfg.t1, so,
                              res && res->lagrangian() ? &structure : nullptr);
    cls = to_string(classify_orbit(tr, default_portrait_axis(bundle)));
  } else if (cfg.mode == "full") {
    std::vector<double> q;
    std::vector<double> qd;
    if (cfg.ic.size() == 2 * r) {
      std::span<const double> s(cfg.ic);
      std::tie(q, qd) = lift_state(bundle, s.subspan(0, r), s.subspan(r, r));
    } else if (cfg.ic.size() == 2 * n) {
      q.assign(cfg.ic.begin(), cfg.ic.begin() + static_cast<std::ptrdiff_t>(n));
      qd.assign(cfg.ic.begin() + static_cast<std::ptrdiff_t>(n), cfg.ic.end());
    } else {
      throw DimensionError("--ic needs " + std::to_string(2 * r) + " reduced or " + std::to_string(2 * n) +
                           " full-state numbers, got " + std::to_string(cfg.ic.size()));
    }
    tr = simulate_full(bundle, q, qd, Gains{cfg.kp, cfg.kd}, cfg.t1, so);
  } else {
    throw DomainError("--mode must be constrained or full");
  }

  const std::string fmt = check_format(cfg.format, "csv");
  const auto dir = output_dir(cfg.out);
  const auto traj_path = dir / (bundle.name + "-trajectory." + fmt);
  if (fmt == "csv") {
    std::ostringstream os;
    write_csv(os, tr);
    write_atomic(traj_path, os.str());
  } else {
    write_atomic(traj_path, trajectory_json(tr).dump() + "\n");
  }
  const json summary = simulation_summary_json(bundle.name, cfg.mode, tr, cls);
  write_atomic(dir / (bundle.name + "-simulate.json"), summary.dump(2) + "\n");
  out << summary.dump(2) << "\n";
  return kExitLagrangian;
}

int cmd_portrait(const RunConfig& cfg, std::ostream& out) {
  const ModelBundle bundle = resolve_model(cfg);
  const std::size_t r = bundle.parametrization.dim();
  std::vector<InitialCondition> ics;
  for (const auto& v : cfg.ics) {
    if (v.size() != 2 * r) throw DimensionError("each portrait IC needs " + std::to_string(2 * r) + " numbers");
    ics.push_back({{v.begin(), v.begin() + static_cast<std::ptrdiff_t>(r)}, {v.begin() + static_cast<std::ptrdiff_t>(r), v.end()}});
  }
  if (ics.empty()) ics = default_portrait_ics(bundle);
  PortraitOptions po;
  po.sim = sim_options(cfg);
  const std::size_t axis = default_portrait_axis(bundle);
  const auto orbits = phase_portrait(bundle, ics, cfg.t1, po);

  const std::string fmt = check_format(cfg.format, "csv");
  const auto dir = output_dir(cfg.out);
  const json summary = portrait_json(bundle.name, orbits, axis);
  if (fmt == "csv") {
    std::ostringstream os;
    write_portrait_csv(os, orbits, axis);
    write_atomic(dir / (bundle.name + "-portrait.csv"), os.str());
  } else {
    json full = summary;
    for (std::size_t i = 0; i < orbits.size(); ++i) full["orbits"][i]["trajectory"] = trajectory_json(orbits[i].traj);
    write_atomic(dir / (bundle.name + "-portrait.json"), full.dump() + "\n");
  }
  write_atomic(dir / (bundle.name + "-portrait-summary.json"), summary.dump(2) + "\n");
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    out << "run " << i << ": " << to_string(orbits[i].cls) << " (lift range " << format_number(orbits[i].lift_range)
        << ")\n";
  }
  return kExitLagrangian;
}

int cmd_holonomy(const RunConfig& cfg, std::ostream& out) {
  const ModelBundle bundle = resolve_model(cfg);
  const ConstrainedSystem cs = bundle.constrained();
  const Chart& chart = bundle.parametrization.reduced;
  std::vector<double> base = cfg.base;
  if (base.empty()) {
    if (!bundle.generators.empty()) {
      base = bundle.generators.front().base;
    } else {
      base.assign(chart.dim, 0.0);
      for (std::size_t i = 0; i < chart.dim; ++i)
        if (!chart.periodic[i] && std::isfinite(chart.lo[i]) && std::isfinite(chart.hi[i]))
          base[i] = 0.5 * (chart.lo[i] + chart.hi[i]);
    }
  }
  if (base.size() != chart.dim) throw DimensionError("--base needs " + std::to_string(chart.dim) + " numbers");
  if (!chart.contains(base)) throw DomainError("loop base point lies outside the reduced chart");

  std::vector<LoopDescriptor> loops;
  if (cfg.loop == "generator") {
    if (bundle.generators.empty()) throw DomainError("model '" + bundle.name + "' has no generator loops");
    if (cfg.base.empty()) {
      loops = bundle.generators;
    } else {
      for (const auto& g : bundle.generators) {
        std::size_t axis = 0;
        for (std::size_t i = 0; i < chart.dim; ++i)
          if (g.path.end()[i] != g.path.start()[i]) axis = i;
        loops.push_back(LoopDescriptor::generator(base, axis, g.tag));
      }
    }
  } else if (cfg.loop == "constant") {
    loops.push_back(LoopDescriptor::constant(base));
  } else if (cfg.loop.rfind("axis:", 0) == 0) {
    std::size_t axis = 0;
    try {
      axis = std::stoul(cfg.loop.substr(5));
    } catch (const std::exception&) {
      throw DomainError("--loop axis:<i> needs an index");
    }
    if (axis >= chart.dim || !chart.periodic[axis]) throw DomainError("--loop axis must name a periodic coordinate");
    loops.push_back(LoopDescriptor::generator(base, axis, "axis " + std::to_string(axis)));
  } else {
    throw DomainError("--loop must be generator, constant or axis:<i>");
  }

  const Connection conn = cs.induced_connection();
  std::vector<HolonomyEntry> entries;
  for (const auto& l : loops) {
    TransportMap tm = loop_transport(conn, l, cfg.tol.value_or(1e-10));
    double defect = 0.0;
    for (std::size_t i = 0; i < tm.matrix.rows(); ++i)
      for (std::size_t j = 0; j < tm.matrix.cols(); ++j)
        defect = std::max(defect, std::abs(tm.matrix(i, j) - (i == j ? 1.0 : 0.0)));
    entries.push_back({l.tag, l.base, tm.matrix, defect});
  }
  const json j = holonomy_json(bundle.name, entries);
  if (cfg.format == "json") {
    out << j.dump(2) << "\n";
  } else {
    for (const auto& e : entries) {
      out << e.tag << ":";
      for (double v : e.matrix.data()) out << " " << format_number(v);
      out << "  (|P - I| = " << format_number(e.identity_defect) << ")\n";
    }
  }
  if (output_dir_configured(cfg.out)) write_atomic(output_dir(cfg.out) / (bundle.name + "-holonomy.json"), j.dump(2) + "\n");
  return kExitLagrangian;
}

// Flags shared by every subcommand, bound to one set of variables.
struct Flags {
  std::string config;
  std::string model;
  std::vector<std::string> params;
  std::size_t grid = 0;
  double tol = 0.0;
  std::string out;
  std::uint64_t seed = 1;
  std::string format;
  std::string ic;
  std::vector<std::string> ics;
  double t1 = 0.0;
  std::string mode;
  double kp = 0.0;
  double kd = 0.0;
  std::size_t samples = 0;
  std::string method;
  double step = 0.0;
  std::string loop;
  std::string base;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; flags override its values");
  sub->add_option("--model", f.model, "circle | sphere | dpc-a | dpc-b");
  sub->add_option("--param", f.params, "model parameter override k=v (repeatable)");
  sub->add_option("--grid", f.grid, "grid points per reduced coordinate");
  sub->add_option("--tol", f.tol, "tolerance (analysis threshold, integrator or transport tolerance)");
  sub->add_option("--out", f.out, std::string("output directory (default $") + kOutDirEnv + ", then .)");
  sub->add_option("--seed", f.seed, "seed for randomized checks");
  sub->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

void add_sim(CLI::App* sub, Flags& f, bool single_ic) {
  if (single_ic)
    sub->add_option("--ic", f.ic, "initial state, comma separated: theta..,theta_dot.. (or q..,qdot.. in full mode)");
  else
    sub->add_option("--ic", f.ics, "initial state theta..,theta_dot.. (repeatable)");
  sub->add_option("--t1", f.t1, "horizon");
  sub->add_option("--samples", f.samples, "output samples (0 = integrator steps)");
  sub->add_option("--method", f.method, "rk45 | rk4")->check(CLI::IsMember({"rk45", "rk4"}));
  sub->add_option("--step", f.step, "fixed step for rk4");
}

RunConfig merge(const CLI::App* sub, const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  cfg.command = sub->get_name();
  auto given = [sub](const char* name) { return sub->count(name) > 0; };
  if (given("--model")) {
    cfg.model = f.model;
    cfg.system.reset();
  }
  if (given("--param"))
    for (const auto& [k, v] : parse_params(f.params)) cfg.params[k] = v;
  if (given("--grid")) cfg.grid = f.grid;
  if (given("--tol")) cfg.tol = f.tol;
  if (given("--out")) cfg.out = f.out;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--format")) cfg.format = f.format;
  if (sub->get_option_no_throw("--ic") && given("--ic")) {
    if (cfg.command == "portrait") {
      cfg.ics.clear();
      for (const auto& s : f.ics) cfg.ics.push_back(parse_list(s));
    } else {
      cfg.ic = parse_list(f.ic);
    }
  }
  auto opt = [&](const char* name) { return sub->get_option_no_throw(name) && given(name); };
  if (opt("--t1")) cfg.t1 = f.t1;
  if (opt("--mode")) cfg.mode = f.mode;
  if (opt("--kp")) cfg.kp = f.kp;
  if (opt("--kd")) cfg.kd = f.kd;
  if (opt("--samples")) cfg.samples = f.samples;
  if (opt("--method")) cfg.method = f.method;
  if (opt("--step")) cfg.step = f.step;
  if (opt("--loop")) cfg.loop = f.loop;
  if (opt("--base")) cfg.base = parse_list(f.base);
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analysis and simulation of virtual holonomic constraints", "vhc"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "decide whether the constrained dynamics are Lagrangian");
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "simulate the constrained or the closed-loop full system");
  CLI::App* holonomy_cmd = app.add_subcommand("holonomy", "parallel transport around loops of the reduced chart");
  CLI::App* portrait_cmd = app.add_subcommand("portrait", "phase portrait batch with orbit classification");
  for (CLI::App* sub : {analyze_cmd, simulate_cmd, holonomy_cmd, portrait_cmd}) add_common(sub, f);
  add_sim(simulate_cmd, f, true);
  simulate_cmd->add_option("--mode", f.mode, "constrained | full")->check(CLI::IsMember({"constrained", "full"}));
  simulate_cmd->add_option("--kp", f.kp, "proportional gain (full mode)");
  simulate_cmd->add_option("--kd", f.kd, "derivative gain (full mode)");
  add_sim(portrait_cmd, f, false);
  holonomy_cmd->add_option("--loop", f.loop, "generator | constant | axis:<i>");
  holonomy_cmd->add_option("--base", f.base, "loop base point, comma separated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "vhc: " << e.what() << "\n";
    return kExitError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const RunConfig cfg = merge(sub, f);
    if (sub == analyze_cmd) return cmd_analyze(cfg, out);
    if (sub == simulate_cmd) return cmd_simulate(cfg, out);
    if (sub == holonomy_cmd) return cmd_holonomy(cfg, out);
    return cmd_portrait(cfg, out);
  } catch (const UnsupportedError& e) {
    err << "vhc: unsupported: " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const std::exception& e) {
    err << "vhc: error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace vhc
