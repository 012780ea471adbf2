#pragma once

// Trajectories of the constrained and the closed-loop full dynamics, energy
// audits and phase-portrait batches.

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vhc/calculus.hpp"
#include "vhc/metrize2d.hpp"
#include "vhc/models.hpp"

namespace vhc {

struct SimOptions {
  OdeOptions ode = default_ode();
  /// Uniform output samples on [0, t1] (at least 2); 0 keeps the accepted
  /// integrator steps.
  std::size_t samples = 201;

  static OdeOptions default_ode() {
    OdeOptions o;
    o.method = OdeMethod::rk45;
    o.tol = 1e-10;
    o.max_step = 1e-2;
    return o;
  }
};

/// States are stacked (positions, velocities). `residual` is |h| + |ḣ| per
/// sample; `energy` is filled only when a Lagrangian structure was supplied.
struct Trajectory {
  std::size_t dim = 0;
  std::vector<std::string> labels;  // 2 * dim state column names
  std::vector<double> t;
  std::vector<std::vector<double>> states;
  std::vector<double> residual;
  std::vector<double> energy;
  /// Largest kinetic energy along the run (set with the energy).
  double kinetic_scale = 0.0;

  std::size_t size() const { return t.size(); }
  bool has_energy() const { return !energy.empty(); }
  std::span<const double> position(std::size_t i) const { return {states[i].data(), dim}; }
  std::span<const double> velocity(std::size_t i) const { return {states[i].data() + dim, dim}; }

  double max_residual() const;
  /// max |E(t) − E(0)| divided by max(|E(0)|, max kinetic energy seen); the
  /// kinetic term keeps the ratio meaningful when the potential's arbitrary
  /// constant makes E(0) small. NaN without energy.
  double energy_drift() const;
};

/// Integrates θ̈ = −Γ_C(θ̇, θ̇) − λ(θ). Leaving the reduced chart (bounded
/// coordinates) aborts with IntegrationError. With a Lagrangian report the
/// energy ½θ̇ᵀD_Cθ̇ + P_C is attached.
Trajectory simulate_constrained(const ModelBundle& bundle, std::span<const double> theta0,
                                std::span<const double> theta_dot0, double t1, const SimOptions& opts = {},
                                const LagrangianReport* structure = nullptr);

struct Gains {
  double kp = 16.0;
  double kd = 8.0;
};

/// Override for the closed-loop input; receives (q, q̇).
using Feedback = std::function<std::vector<double>(std::span<const double>, std::span<const double>)>;

/// D q̈ + C q̇ + ∇P = B τ with the stabilizing feedback for the bundle's h
/// (or `feedback` if given). Throws SingularError where the feedback breaks.
Trajectory simulate_full(const ModelBundle& bundle, std::span<const double> q0, std::span<const double> qdot0,
                         Gains gains, double t1, const SimOptions& opts = {}, const Feedback& feedback = {});

/// (φ(θ), dφ(θ) θ̇): an exact point of T C.
std::pair<std::vector<double>, std::vector<double>> lift_state(const ModelBundle& bundle,
                                                               std::span<const double> theta,
                                                               std::span<const double> theta_dot);

enum class OrbitClass { stationary, rocking, rotating };
const char* to_string(OrbitClass c);

/// Lift displacement above 2π means rotating; a range below `still_tol`
/// with (near) zero speed is stationary; everything else rocks.
OrbitClass classify_orbit(const Trajectory& traj, std::size_t axis, double still_tol = 1e-9);

struct InitialCondition {
  std::vector<double> theta;
  std::vector<double> theta_dot;
};

struct Orbit {
  InitialCondition ic;
  Trajectory traj;
  OrbitClass cls = OrbitClass::stationary;
  double lift_range = 0.0;
};

struct PortraitOptions {
  SimOptions sim;
  /// Coordinate whose orbit is classified; defaults to the last periodic one.
  std::optional<std::size_t> axis;
  /// Worker threads (0 = hardware concurrency).
  unsigned threads = 0;
};

/// Runs simulate_constrained for every initial condition (in parallel) and
/// classifies the orbits.
std::vector<Orbit> phase_portrait(const ModelBundle& bundle, const std::vector<InitialCondition>& ics, double t1,
                                  const PortraitOptions& opts = {}, const LagrangianReport* structure = nullptr);

/// Initial conditions documenting both regimes: slow starts at θ_axis = π
/// rock, fast starts rotate. Other coordinates start at zero.
std::vector<InitialCondition> default_portrait_ics(const ModelBundle& bundle);

std::size_t default_portrait_axis(const ModelBundle& bundle);

/// 17 significant digits, so CSV goldens are bit-stable.
std::string format_number(double v);

/// Header `t,<labels>,residual,energy`; energy is "nan" when absent.
void write_csv(std::ostream& os, const Trajectory& traj);

/// Header `run,class,t,theta,theta_dot` for the classified coordinate.
void write_portrait_csv(std::ostream& os, const std::vector<Orbit>& orbits, std::size_t axis);

}  // namespace vhc
