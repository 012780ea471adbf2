#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "vhc/chart.hpp"
#include "vhc/cli.hpp"

using namespace vhc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "vhc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string data(const std::string& name) { return std::string(VHC_TEST_DATA) + "/" + name; }
std::string golden(const std::string& name) { return std::string(VHC_TEST_DATA) + "/../golden/" + name; }

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

// Numbers near zero only need to stay near zero; others agree to 1e-6.
void compare(const json& want, const json& got, const std::string& where) {
  CAPTURE(where);
  if (want.is_number() && got.is_number()) {
    const double w = want.get<double>(), g = got.get<double>();
    if (std::abs(w) < 1e-6)
      CHECK(std::abs(g) < 1e-6);
    else
      CHECK(std::abs(g - w) <= 1e-6 * std::abs(w));
    return;
  }
  REQUIRE(want.type_name() == std::string(got.type_name()));
  if (want.is_object()) {
    REQUIRE(want.size() == got.size());
    for (const auto& [k, v] : want.items()) {
      REQUIRE(got.contains(k));
      compare(v, got.at(k), where + "." + k);
    }
  } else if (want.is_array()) {
    REQUIRE(want.size() == got.size());
    for (std::size_t i = 0; i < want.size(); ++i) compare(want[i], got[i], where + "[" + std::to_string(i) + "]");
  } else {
    CHECK(want == got);
  }
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("vhc-test-" + std::to_string(std::rand()) + "-" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct EnvGuard {
  EnvGuard(const char* value) {
    if (value)
      ::setenv("VHC_OUT_DIR", value, 1);
    else
      ::unsetenv("VHC_OUT_DIR");
  }
  ~EnvGuard() { ::unsetenv("VHC_OUT_DIR"); }
};

bool no_temp_files(const fs::path& dir) {
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().string().find(".tmp.") != std::string::npos) return false;
  return true;
}

}  // namespace

TEST_CASE("analyze reports match the golden files") {
  EnvGuard env(nullptr);
  for (const auto& [model, code] : std::vector<std::pair<std::string, int>>{
           {"circle", 0}, {"sphere", 0}, {"dpc-a", 3}, {"dpc-b", 0}}) {
    Run r = run({"analyze", "--model", model, "--format", "json"});
    CAPTURE(model);
    CHECK(r.code == code);
    json got = json::parse(r.out);
    CHECK(got.at("schema") == "vhc.report");
    CHECK(got.at("schema_version") == 1);
    if (std::getenv("VHC_UPDATE_GOLDEN")) {
      std::ofstream(golden(model + "-report.json")) << got.dump(2) << "\n";
      continue;
    }
    compare(read_json(golden(model + "-report.json")), got, model);
  }
}

TEST_CASE("exit codes") {
  EnvGuard env(nullptr);
  CHECK(run({"analyze", "--model", "circle", "--param", "alpha=0.3"}).code == kExitNotLagrangian);
  CHECK(run({"analyze", "--model", "circle"}).code == kExitLagrangian);
  CHECK(run({"analyze", "--config", data("unsupported.json")}).code == kExitUnsupported);
  CHECK(run({"analyze", "--model", "nope"}).code == kExitError);
  CHECK(run({"analyze", "--model", "circle", "--param", "alpha"}).code == kExitError);
  CHECK(run({"analyze", "--model", "circle", "--param", "alpha=2"}).code == kExitError);
  CHECK(run({"analyze", "--format", "xml"}).code == kExitError);
  CHECK(run({}).code == kExitError);
  CHECK(run({"--help"}).code == 0);
  Run bad = run({"simulate", "--model", "sphere", "--ic", "1,2,3"});
  CHECK(bad.code == kExitError);
  CHECK(bad.err.find("4 numbers") != std::string::npos);
  CHECK(run({"holonomy", "--model", "sphere", "--base", "4,0"}).code == kExitError);
}

TEST_CASE("text report") {
  EnvGuard env(nullptr);
  Run r = run({"analyze", "--model", "dpc-a"});
  CHECK(r.out.find("Lagrangian: no") != std::string::npos);
  CHECK(r.out.find("metrizable: yes  potential: no") != std::string::npos);
}

TEST_CASE("output directory: flag, environment, atomic writes") {
  TempDir a, b;
  {
    EnvGuard env(nullptr);
    Run r = run({"analyze", "--model", "circle", "--out", a.path.string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(a.path / "circle-report.json"));
    CHECK(read_json(a.path / "circle-report.json").at("verdict") == "lagrangian");
  }
  {
    EnvGuard env(b.path.string().c_str());
    CHECK(run({"holonomy", "--model", "circle"}).code == 0);
    CHECK(fs::exists(b.path / "circle-holonomy.json"));
    // the flag wins over the environment
    CHECK(run({"holonomy", "--model", "dpc-b", "--out", a.path.string()}).code == 0);
    CHECK(fs::exists(a.path / "dpc-b-holonomy.json"));
    CHECK_FALSE(fs::exists(b.path / "dpc-b-holonomy.json"));
  }
  CHECK(no_temp_files(a.path));
  CHECK(no_temp_files(b.path));
  {
    // an unwritable target fails cleanly and leaves nothing behind
    EnvGuard env(nullptr);
    fs::path file = a.path / "blocked";
    std::ofstream(file) << "x";
    CHECK(run({"analyze", "--model", "circle", "--out", (file / "sub").string()}).code == kExitError);
  }
}

TEST_CASE("simulate writes csv and json") {
  TempDir d;
  EnvGuard env(nullptr);
  Run r = run({"simulate", "--model", "dpc-b", "--ic", "0,3.141592653589793,0,4", "--t1", "2", "--samples", "11",
               "--out", d.path.string()});
  CHECK(r.code == 0);
  json summary = json::parse(r.out);
  CHECK(summary.at("orbit_class") == "rocking");
  CHECK(summary.at("energy_drift").get<double>() < 1e-6);
  std::ifstream csv(d.path / "dpc-b-trajectory.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,theta1,theta2,thetadot1,thetadot2,residual,energy");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 11);

  Run eq = run({"simulate", "--model", "sphere", "--ic", "1.5707963267948966,0,0,1", "--t1", "3", "--format", "json",
                "--out", d.path.string()});
  CHECK(eq.code == 0);
  json tr = read_json(d.path / "sphere-trajectory.json");
  for (const auto& s : tr.at("states")) CHECK(std::abs(s[0].get<double>() - 1.5707963267948966) < 1e-12);

  Run still = run({"simulate", "--model", "dpc-a", "--ic", "0,3.141592653589793,0,0", "--t1", "2", "--out",
                   d.path.string()});
  CHECK(json::parse(still.out).at("orbit_class") == "stationary");

  Run full = run({"simulate", "--model", "dpc-b", "--mode", "full", "--ic", "0,2,0,1", "--t1", "2", "--out",
                  d.path.string()});
  CHECK(full.code == 0);
  CHECK(json::parse(full.out).at("max_constraint_residual").get<double>() < 1e-6);
}

TEST_CASE("holonomy command") {
  EnvGuard env(nullptr);
  Run c = run({"holonomy", "--model", "circle", "--param", "alpha=0.3", "--format", "json"});
  CHECK(c.code == 0);
  const double p = json::parse(c.out).at("loops")[0].at("matrix")[0][0].get<double>();
  CHECK(p == doctest::Approx(std::exp(-kTwoPi * std::tan(0.3))).epsilon(1e-9));
  Run d = run({"holonomy", "--model", "dpc-a", "--format", "json"});
  CHECK(json::parse(d.out).at("loops")[0].at("identity_defect").get<double>() < 1e-7);
  Run k = run({"holonomy", "--model", "sphere", "--loop", "constant", "--format", "json"});
  CHECK(json::parse(k.out).at("loops")[0].at("identity_defect").get<double>() == 0.0);
  CHECK(run({"holonomy", "--model", "dpc-b", "--loop", "axis:1", "--base", "0.5,1"}).code == 0);
  CHECK(run({"holonomy", "--model", "dpc-b", "--loop", "axis:0"}).code == kExitError);
  CHECK(run({"holonomy", "--model", "dpc-b", "--loop", "spiral"}).code == kExitError);
}

TEST_CASE("portrait command") {
  TempDir d;
  EnvGuard env(nullptr);
  Run r = run({"portrait", "--model", "dpc-b", "--t1", "10", "--out", d.path.string()});
  CHECK(r.code == 0);
  json s = read_json(d.path / "dpc-b-portrait-summary.json");
  bool rocking = false, rotating = false;
  for (const auto& o : s.at("orbits")) {
    rocking |= o.at("class") == "rocking";
    rotating |= o.at("class") == "rotating";
  }
  CHECK(rocking);
  CHECK(rotating);
  CHECK(fs::exists(d.path / "dpc-b-portrait.csv"));
  Run custom = run({"portrait", "--model", "dpc-b", "--ic", "0,3.14,0,1", "--ic", "0,3.14,0,30", "--t1", "5",
                    "--out", d.path.string()});
  CHECK(custom.code == 0);
  CHECK(read_json(d.path / "dpc-b-portrait-summary.json").at("orbits").size() == 2);
}

TEST_CASE("config file with flag overrides") {
  TempDir d;
  EnvGuard env(nullptr);
  fs::path cfg = d.path / "run.json";
  std::ofstream(cfg) << R"({"model": "circle", "params": {"alpha": 0.3}, "format": "json"})";
  Run r = run({"analyze", "--config", cfg.string()});
  CHECK(r.code == kExitNotLagrangian);
  CHECK(json::parse(r.out).at("model").at("params").at("alpha") == 0.3);
  CHECK(run({"analyze", "--config", cfg.string(), "--param", "alpha=0"}).code == kExitLagrangian);
  CHECK(run({"analyze", "--config", cfg.string(), "--model", "dpc-b"}).code == kExitError);  // alpha unknown to dpc-b
  CHECK(run({"analyze", "--config", data("custom_circle.json")}).code == kExitNotLagrangian);
  std::ofstream(cfg) << R"({"modle": "circle"})";
  CHECK(run({"analyze", "--config", cfg.string()}).code == kExitError);
}
