#include "vhc/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "vhc/error.hpp"

namespace vhc {

using nlohmann::json;

json number_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json matrix_json(const Mat<double>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(number_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

namespace {

json vector_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string fmt(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

json report_json(const AnalysisResult& r) {
  json j;
  j["schema"] = "vhc.report";
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = {{"name", r.model}, {"params", r.params}};
  j["reduced_dim"] = r.reduced_dim;
  j["verdict"] = to_string(r.verdict);
  j["lagrangian"] = r.lagrangian();
  j["metrizable"] = r.metrizable;
  j["potential_exists"] = r.potential_exists;
  j["method"] = r.method;
  j["note"] = r.note;
  j["regularity"] = {{"regular", r.regularity.regular}, {"min_singular_ratio", number_json(r.regularity.min_ratio)}};
  j["orthogonal_forces"] = {{"orthogonal", r.orthogonality.orthogonal},
                            {"max_defect", number_json(r.orthogonality.max_defect)}};
  j["curvature"] = {{"min", number_json(r.min_curvature)}, {"max", number_json(r.max_curvature)}};
  j["recurrence"] = {{"residual", number_json(r.recurrence_residual)},
                     {"ricci_sign", r.ric_sign.empty() ? json(nullptr) : json(r.ric_sign)}};
  j["closedness_residual"] = number_json(r.closedness_residual);
  j["loop_integrals"] = vector_json(r.loop_integrals);
  j["cylinder"] = {{"a", number_json(r.a)}, {"b", number_json(r.b)}};
  j["one_dim"] = {{"int_psi2", number_json(r.int_psi2)}, {"int_psi1_m", number_json(r.int_psi1_m)}};
  json hol = json::array();
  for (const auto& h : r.holonomy) hol.push_back({{"tag", h.tag}, {"matrix", matrix_json(h.matrix)}});
  j["holonomy"] = hol;
  j["el_residual"] = number_json(r.el_residual);
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back(
        {{"theta", vector_json(s.theta)}, {"metric", matrix_json(s.metric)}, {"potential", number_json(s.potential)}});
  j["samples"] = samples;
  return j;
}

std::string report_text(const AnalysisResult& r) {
  std::ostringstream os;
  os << "model: " << r.model;
  if (!r.params.empty()) {
    os << " (";
    bool first = true;
    for (const auto& [k, v] : r.params) {
      os << (first ? "" : ", ") << k << "=" << fmt(v);
      first = false;
    }
    os << ")";
  }
  os << "\nreduced dimension: " << r.reduced_dim << "\n";
  os << "Lagrangian: " << yes_no(r.lagrangian()) << "  (method: " << r.method << ")\n";
  os << "metrizable: " << yes_no(r.metrizable) << "  potential: " << yes_no(r.potential_exists) << "\n";
  os << "regularity ratio: " << fmt(r.regularity.min_ratio) << "\n";
  if (!std::isnan(r.max_curvature))
    os << "curvature on grid: [" << fmt(r.min_curvature) << ", " << fmt(r.max_curvature) << "]\n";
  if (!std::isnan(r.recurrence_residual))
    os << "Ricci recurrence residual: " << fmt(r.recurrence_residual) << " (Ricci " << r.ric_sign << ")\n";
  if (!std::isnan(r.a)) os << "metric family: a = " << fmt(r.a) << ", b = " << fmt(r.b) << "\n";
  if (!std::isnan(r.closedness_residual)) os << "closedness residual: " << fmt(r.closedness_residual) << "\n";
  if (!std::isnan(r.int_psi2))
    os << "integral of Psi2: " << fmt(r.int_psi2) << ", of Psi1 M: " << fmt(r.int_psi1_m) << "\n";
  for (const auto& h : r.holonomy) {
    os << "holonomy " << h.tag << ":";
    for (double v : h.matrix.data()) os << " " << fmt(v);
    os << "\n";
  }
  if (!std::isnan(r.el_residual)) os << "Euler-Lagrange residual: " << fmt(r.el_residual) << "\n";
  if (!r.note.empty()) os << "note: " << r.note << "\n";
  return os.str();
}

json holonomy_json(const std::string& model, const std::vector<HolonomyEntry>& loops) {
  json j;
  j["schema"] = "vhc.holonomy";
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = model;
  json arr = json::array();
  for (const auto& l : loops)
    arr.push_back({{"tag", l.tag},
                   {"base", vector_json(l.base)},
                   {"matrix", matrix_json(l.matrix)},
                   {"identity_defect", number_json(l.identity_defect)}});
  j["loops"] = arr;
  return j;
}

json trajectory_json(const Trajectory& tr) {
  json j;
  j["schema"] = "vhc.trajectory";
  j["schema_version"] = kReportSchemaVersion;
  j["labels"] = tr.labels;
  j["t"] = vector_json(tr.t);
  json states = json::array();
  for (const auto& s : tr.states) states.push_back(vector_json(s));
  j["states"] = states;
  j["residual"] = vector_json(tr.residual);
  j["energy"] = tr.has_energy() ? vector_json(tr.energy) : json(nullptr);
  return j;
}

json simulation_summary_json(const std::string& model, const std::string& mode, const Trajectory& tr,
                             const std::string& orbit_class) {
  json j;
  j["schema"] = "vhc.simulation";
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = model;
  j["mode"] = mode;
  j["samples"] = tr.size();
  j["t_end"] = tr.size() ? number_json(tr.t.back()) : json(nullptr);
  j["max_constraint_residual"] = number_json(tr.max_residual());
  j["energy_drift"] = number_json(tr.energy_drift());
  j["orbit_class"] = orbit_class.empty() ? json(nullptr) : json(orbit_class);
  return j;
}

json portrait_json(const std::string& model, const std::vector<Orbit>& orbits, std::size_t axis) {
  json j;
  j["schema"] = "vhc.portrait";
  j["schema_version"] = kReportSchemaVersion;
  j["model"] = model;
  j["axis"] = axis;
  json arr = json::array();
  for (const auto& o : orbits)
    arr.push_back({{"theta0", vector_json(o.ic.theta)},
                   {"theta_dot0", vector_json(o.ic.theta_dot)},
                   {"class", to_string(o.cls)},
                   {"lift_range", number_json(o.lift_range)},
                   {"energy_drift", number_json(o.traj.energy_drift())}});
  j["orbits"] = arr;
  return j;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DomainError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DomainError("cannot move output into place at '" + path.string() + "'");
  }
}

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

bool output_dir_configured(const std::string& flag) {
  const char* env = std::getenv(kOutDirEnv);
  return !flag.empty() || (env && *env);
}

}  // namespace vhc
