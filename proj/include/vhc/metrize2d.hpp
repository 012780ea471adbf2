#pragma once

// Two-dimensional metrizability: Ricci recurrence for curved connections,
// exactness of one-forms and potentials, and the metric family search on
// the cylinder R x S¹ for flat connections with trivial holonomy.

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vhc/chart.hpp"
#include "vhc/field.hpp"
#include "vhc/holonomy.hpp"
#include "vhc/linalg.hpp"
#include "vhc/manifold.hpp"
#include "vhc/vhc.hpp"

namespace vhc {

enum class Definiteness { positive, negative, indefinite };
const char* to_string(Definiteness d);

/// Uniform eigenvalue sign over all samples; zero eigenvalues count as
/// indefinite.
Definiteness definiteness(const std::vector<Mat<double>>& samples, double tol = 1e-12);

struct RecurrenceData {
  Field omega;  // 2 components
  double residual = 0.0;
  bool recurrent = false;
  /// f with df = ω, anchored by f(anchor) = 0. Valid when ω is exact.
  Field f;
  std::vector<double> anchor;
  Definiteness ric_sign = Definiteness::indefinite;
};

/// Least-squares ω with ∇Ric = ω ⊗ Ric at every grid point. Throws
/// SingularError where Ric is (numerically) zero.
RecurrenceData recurrence_solve(const Connection& conn, const std::vector<std::vector<double>>& grid,
                                double tol = 1e-7, std::vector<double> anchor = {});

/// Line integral of a one-form from `from` to `to` along coordinate legs,
/// periodic coordinates first.
double canonical_line_integral(const Field& oneform, const Chart& chart, const std::vector<double>& from,
                               const std::vector<double>& to, double tol = 1e-10);

struct ExactnessReport {
  bool closed = false;
  bool exact = false;
  double closedness_defect = 0.0;
  std::vector<double> loop_integrals;
};

ExactnessReport exactness_check(const Field& oneform, const std::vector<LoopDescriptor>& generators,
                                const std::vector<std::vector<double>>& grid, double tol = 1e-8);

struct MetricFromRicci {
  Field metric;
  int sign = 1;
  double compatibility_defect = 0.0;  // max |∇g| on the grid
  double christoffel_defect = 0.0;    // max |Γ(g) − Γ| on the grid
};

/// g = ±exp(−f + b) Ric. Throws PreconditionError unless the recurrence
/// holds and Ric is definite.
MetricFromRicci metric_from_ricci(const RecurrenceData& data, const Connection& conn,
                                  const std::vector<std::vector<double>>& grid, double b = 0.0);

/// P_C(θ) = ∫ μ along the canonical path from `base`. The returned field
/// differentiates its own values (fourth-order differences), so dP_C = μ is
/// a genuine check.
Field potential_from_oneform(const Field& mu, const Chart& chart, std::vector<double> base, double tol = 1e-10);

/// Lagrangian structure verdict with the reconstructed data.
struct LagrangianReport {
  bool lagrangian = false;
  bool metrizable = false;
  bool potential_exists = false;
  std::string method;
  std::string note;
  Field metric;
  Field potential;
  double recurrence_residual = std::numeric_limits<double>::quiet_NaN();
  double closedness_residual = std::numeric_limits<double>::quiet_NaN();
  double curvature = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> loop_integrals;
  Definiteness ric_sign = Definiteness::indefinite;
  double a = std::numeric_limits<double>::quiet_NaN();
  double b = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, double>> residual_curve;  // (a, residual)
};

/// max |θ̈_EL − θ̈| over the states, θ̈_EL from L = ½θ̇ᵀ D_C θ̇ − P_C.
double lagrangian_residual(const Field& metric, const Field& potential, const ConstrainedSystem& cs,
                           const std::vector<std::pair<std::vector<double>, std::vector<double>>>& states);

/// Closedness data of the first component of D_C λ on R x S¹:
/// ∂_{θ²}[λ₁ + e^{−I₁}(I₂ + a)λ₂] = dA + a dB at each sampled θ².
struct ClosednessProfile {
  std::vector<double> theta;
  std::vector<double> dA;
  std::vector<double> dB;
  double residual(double a) const;
  /// Minimizer of residual(a) over [lo, hi].
  double argmin(double lo, double hi) const;
};

ClosednessProfile closedness_profile(const ConstrainedSystem& cs, const CylinderIntegrals& ci, std::size_t n_theta);

/// D_C(θ²; a, b) = P⁻ᵀ [[1, a], [a, b]] P⁻¹ with P = [[1, −I₂], [0, e^{I₁}]].
Field cylinder_metric(const CylinderIntegrals& ci, double a, double b);

struct CylinderSearchOptions {
  double a_lo = -2.0;
  double a_hi = 2.0;
  std::size_t a_steps = 401;
  double b = 1.0;
  std::size_t n_theta = 64;
  double tol = 1e-6;
};

/// Sweeps a, reconstructs the potential when the closedness residual drops
/// below tol. Throws PreconditionError if the generator transport is not the
/// identity or the connection lacks the cylinder structure.
LagrangianReport cylinder_lagrangian_search(const ConstrainedSystem& cs, const CylinderSearchOptions& opts = {});

/// Curved 2-D pipeline: recurrence, definiteness, exactness of ω, metric,
/// then exactness of D_C λ and the potential.
LagrangianReport ricci_lagrangian(const ConstrainedSystem& cs, const std::vector<LoopDescriptor>& generators,
                                  const std::vector<std::vector<double>>& grid, double tol = 1e-7);

}  // namespace vhc
