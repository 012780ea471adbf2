#pragma once

// Run configuration shared by the command line and JSON config files, and
// user-defined systems written as expression strings.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vhc/models.hpp"

namespace vhc {

struct RunConfig {
  std::string command;  // analyze | simulate | holonomy | portrait
  std::string model = "sphere";
  std::map<std::string, double> params;
  /// User-defined system (see model_from_json); overrides `model`.
  std::optional<nlohmann::json> system;
  std::size_t grid = 0;           // 0 = model default
  std::optional<double> tol;      // command-specific default when unset
  std::string out;                // empty: $VHC_OUT_DIR, then "."
  std::uint64_t seed = 1;
  std::string format;             // csv | json; empty = command default

  // simulate / portrait
  std::vector<double> ic;         // (θ, θ̇), or (q, q̇) in full mode
  std::vector<std::vector<double>> ics;  // portrait batch; empty = built-in set
  double t1 = 10.0;
  std::string mode = "constrained";  // constrained | full
  double kp = 16.0;
  double kd = 8.0;
  std::size_t samples = 201;
  std::string method = "rk45";    // rk45 | rk4
  double step = 1e-3;             // rk4 step

  // holonomy
  std::string loop = "generator";  // generator | constant | axis:<i>
  std::vector<double> base;

  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys are rejected so typos do not pass silently.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Built-in model by name, or the user-defined system when present.
ModelBundle resolve_model(const RunConfig& cfg);

/// User-defined system. Ambient coordinates are q1..qn, reduced ones
/// t1..tr; "constants" (overridden by `params`) and pi are available.
/// Keys: name, dim, inputs, periodic, constants, inertia, potential, input,
/// annihilator, constraint, phi, reduced {periodic, lo, hi}, generators
/// [{base, axis}], grid_points, grid_margin.
ModelBundle model_from_json(const nlohmann::json& j, const std::map<std::string, double>& params = {});

}  // namespace vhc
