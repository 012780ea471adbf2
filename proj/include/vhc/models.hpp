#pragma once

// Built-in example systems with their constraints and reference values.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "vhc/holonomy.hpp"
#include "vhc/vhc.hpp"

namespace vhc {

struct ModelBundle {
  std::string name;
  std::map<std::string, double> params;
  LagrangianControlSystem system;
  ConstraintParametrization parametrization;
  std::vector<LoopDescriptor> generators;
  /// Reference constants (closed-form symbol values, verdict thresholds).
  std::map<std::string, double> expected;
  /// Points per reduced coordinate on the standard grid, and its margin.
  std::size_t grid_points = 9;
  double grid_margin = 1e-2;

  ConstrainedSystem constrained() const { return ConstrainedSystem(system, parametrization); }
  std::vector<std::vector<double>> standard_grid() const {
    return parametrization.reduced.grid(grid_points, grid_margin);
  }
};

/// Unit mass in the plane pushed along R_α q, constrained to the unit circle.
ModelBundle circle_particle(double alpha);

/// Unit mass in space pushed along diag(1, 1, 2) q, constrained to the unit
/// sphere in spherical coordinates.
ModelBundle sphere_mass();

enum class DpcCase { force_on_cart, torque_on_last_joint };

/// Double pendulum on a cart with unit masses and lengths, constrained by
/// q3 = ρ(q2).
ModelBundle double_pendulum_cart(DpcCase which, double gravity = 9.81);

/// ρ(t) = t + 2 atan((1 + √2) tan(−t/2)), written without the tan branch
/// cut: −2 atan(√2 sin t / (2 + √2 − √2 cos t)).
template <class T>
T dpc_rho(const T& t) {
  using std::atan;
  using std::cos;
  using std::sin;
  const double r2 = std::sqrt(2.0);
  return -2.0 * atan(r2 * sin(t) / (2.0 + r2 - r2 * cos(t)));
}

/// Registry: "circle" (alpha), "sphere", "dpc-a" and "dpc-b" (G).
ModelBundle make_model(const std::string& name, const std::map<std::string, double>& params = {});
std::vector<std::string> model_names();

}  // namespace vhc
