#pragma once

// Parallel transport along piecewise curves, holonomy of generator loops,
// the flat-case invariant-form search and the one-dimensional Lagrangian
// decision.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "vhc/chart.hpp"
#include "vhc/linalg.hpp"
#include "vhc/manifold.hpp"

namespace vhc {

/// Piecewise curve; segment k ends where segment k+1 starts (up to
/// periodic wrap-around).
struct Path {
  std::vector<Curve> segments;

  std::vector<double> start() const;
  std::vector<double> end() const;
  Path inverse() const;
  /// This path followed by `other`.
  Path then(const Path& other) const;
};

/// Closed piecewise curve through `base`.
struct LoopDescriptor {
  std::vector<double> base;
  Path path;
  std::string tag;

  LoopDescriptor inverse() const;
  LoopDescriptor then(const LoopDescriptor& other) const;
  static LoopDescriptor constant(std::vector<double> base);
  /// The loop t -> base + t e_axis, t in [0, 2π], around a periodic axis.
  static LoopDescriptor generator(std::vector<double> base, std::size_t axis, std::string tag);
};

struct TransportMap {
  Mat<double> matrix;
  std::string tag;
  double tol = 0.0;
};

/// Ẋ^k = −γ̇^i Γ^k_{ij} X^j along the curve. Coefficients are evaluated at
/// the wrapped point, so curves may run on the lift of periodic axes.
std::vector<double> parallel_transport(const Connection& conn, const Curve& curve, std::vector<double> v0,
                                       double tol = 1e-10);
std::vector<double> parallel_transport(const Connection& conn, const Path& path, std::vector<double> v0,
                                       double tol = 1e-10);
/// Transport of the standard basis: column j is the image of e_j.
Mat<double> transport_matrix(const Connection& conn, const Path& path, double tol = 1e-10);
TransportMap loop_transport(const Connection& conn, const LoopDescriptor& loop, double tol = 1e-10);

/// Result of the invariant-form search for flat connections.
struct FlatMetrizability {
  bool metrizable = false;
  Mat<double> g0;  // invariant SPD form at the base point (g0(0,0) = 1)
  std::vector<Mat<double>> invariant_basis;
  std::vector<TransportMap> transports;
  double max_curvature = 0.0;
};

/// Throws PreconditionError if the curvature exceeds `flat_tol` on the grid.
FlatMetrizability flat_metrizability(const Connection& conn, const std::vector<LoopDescriptor>& generators,
                                     const std::vector<std::vector<double>>& grid, double flat_tol = 1e-8,
                                     double tol = 1e-10);

/// P⁻ᵀ G0 P⁻¹ with P the transport from the start of `path` to its end.
Mat<double> metric_by_transport(const Connection& conn, const Mat<double>& g0, const Path& path,
                                double tol = 1e-10);

// ---------------------------------------------------------------------------
// One-dimensional constraints

/// Reduced dynamics θ̈ = Ψ₁(θ) + Ψ₂(θ) θ̇².
using ScalarFn = std::function<double(double)>;

struct OneDimReport {
  bool periodic = false;
  bool metrizable = false;
  bool lagrangian = false;
  double int_psi2 = 0.0;     // ∫₀^{2π} Ψ₂ (periodic case)
  double int_psi1_m = 0.0;   // ∫₀^{2π} Ψ₁ M̂ = −P̂(2π)
  ScalarFn m_hat;            // on the lift / on R
  ScalarFn p_hat;
  ScalarFn m;                // on the circle; set only when metrizable
  ScalarFn p_c;              // set only when Lagrangian
};

/// M̂(x) = exp(−2∫₀ˣ Ψ₂), P̂(x) = −∫₀ˣ Ψ₁ M̂. For periodic θ the values on
/// the whole lift follow from one period; on R the maps are available on
/// [−range, range].
OneDimReport lagrangian_1d(const ScalarFn& psi1, const ScalarFn& psi2, bool periodic, double tol = 1e-8,
                           double range = 2.0 * kTwoPi);
/// Metric part only (Ψ₁ = 0).
OneDimReport metrizability_1d(const ScalarFn& psi2, bool periodic, double tol = 1e-8);

/// Euler-Lagrange residual of L = ½ M θ̇² − P_C against Ψ₁ + Ψ₂ θ̇², max
/// over the (θ, θ̇) samples.
double el_residual_1d(const OneDimReport& rep, const ScalarFn& psi1, const ScalarFn& psi2,
                      const std::vector<std::pair<double, double>>& states);

// ---------------------------------------------------------------------------
// Cylinder R x S¹ with only Γ¹₂₂, Γ²₂₂ nonzero, both functions of θ².

struct CylinderIntegrals {
  ScalarFn i1;  // −∫₀ᵗ Γ²₂₂
  ScalarFn i2;  // ∫₀ᵗ Γ¹₂₂ e^{I₁}
  ScalarFn g122;
  ScalarFn g222;
  double i1_period = 0.0;
  double i2_period = 0.0;
  double structure_defect = 0.0;
};

/// Throws PreconditionError if the chart is not R x S¹ or the connection
/// does not have the structure above (within `struct_tol` on the grid).
CylinderIntegrals cylinder_integrals(const Connection& conn, double tol = 1e-12, double struct_tol = 1e-8);

/// Transport matrix from (0, 0) to (θ¹, θ²) for such a connection:
/// [[1, −I₂], [0, e^{I₁}]].
Mat<double> cylinder_transport(const CylinderIntegrals& ci, double theta2);

}  // namespace vhc
