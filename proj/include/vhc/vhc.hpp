#pragma once

// Virtual holonomic constraints in coordinates: regularity, the projection
// along the control-acceleration directions, the induced connection, the
// constrained dynamics and the constraint-stabilizing feedback.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vhc/calculus.hpp"
#include "vhc/chart.hpp"
#include "vhc/field.hpp"
#include "vhc/linalg.hpp"
#include "vhc/manifold.hpp"

namespace vhc {

/// D(x) q̈ + C(x, q̇) q̇ + ∇P(x) = B(x) τ on an n-dimensional chart.
struct LagrangianControlSystem {
  Chart chart;
  Field inertia;     // D, n x n, SPD
  Field potential;   // P, scalar
  Field grad_potential;  // ∇P, n
  Field input;       // B, n x m
  Field annihilator; // B⊥, (n-m) x n with B⊥ B = 0
  std::optional<Field> constraint;  // h, m components (optional)

  std::size_t dim() const { return chart.dim; }
  std::size_t inputs() const { return input.shape().cols; }

  /// ∇P from P by forward-mode differentiation.
  static Field gradient_of(const Field& potential);
};

/// φ: θ -> x with θ on the reduced chart. First and second derivatives are
/// taken from φ itself by forward mode.
struct ConstraintParametrization {
  Chart reduced;
  Field phi;  // R^(n-m) -> R^n

  std::size_t dim() const { return reduced.dim; }

  template <class T>
  Mat<T> dphi(std::span<const T> theta) const {
    return jacobian(phi, theta);
  }
  /// d2phi[a](i, j) = ∂_i ∂_j φ^a.
  template <class T>
  std::vector<Mat<T>> d2phi(std::span<const T> theta) const {
    std::vector<Mat<T>> out;
    const std::size_t n = phi.out_dim();
    for (std::size_t a = 0; a < n; ++a) out.push_back(hessian(phi, theta, a));
    return out;
  }
};

struct RegularityReport {
  bool regular = false;
  /// Smallest ratio σ_min / σ_max of [dφ | D⁻¹B] over the grid.
  double min_ratio = 0.0;
  std::vector<double> argmin;
};

/// The pair (system, parametrization) with the formulas of the constrained
/// dynamics exposed at every scalar level, so derived quantities can be
/// differentiated again.
class ConstrainedSystem {
 public:
  ConstrainedSystem(LagrangianControlSystem sys, ConstraintParametrization par);

  const LagrangianControlSystem& system() const { return sys_; }
  const ConstraintParametrization& parametrization() const { return par_; }
  std::size_t reduced_dim() const { return par_.dim(); }
  std::size_t ambient_dim() const { return sys_.dim(); }

  /// (B⊥ D dφ)⁻¹ B⊥ D at φ(θ): maps ambient vectors to θ-components of σ̂.
  template <class T>
  Mat<T> projector(std::span<const T> theta) const {
    std::vector<T> x = par_.phi(theta);
    std::span<const T> xs(x);
    Mat<T> d(ambient_dim(), ambient_dim(), sys_.inertia(xs));
    Mat<T> bp(reduced_dim(), ambient_dim(), sys_.annihilator(xs));
    Mat<T> bpd = bp * d;
    return solve(bpd * par_.dphi(theta), bpd);
  }

  /// Γ_C^k_{ij}(θ) = Σ_a [(B⊥Ddφ)⁻¹B⊥D]_{ka} (∂²_{ij}φ^a + ∂_iφᵀ Γ^a ∂_jφ).
  template <class T>
  Rank3<T> induced_christoffels(std::span<const T> theta) const {
    const std::size_t n = ambient_dim();
    const std::size_t r = reduced_dim();
    std::vector<T> x = par_.phi(theta);
    std::span<const T> xs(x);
    Mat<T> d(n, n, sys_.inertia(xs));
    Mat<T> bp(r, n, sys_.annihilator(xs));
    Mat<T> bpd = bp * d;
    Mat<T> j = par_.dphi(theta);
    Mat<T> proj = solve(bpd * j, bpd);
    std::vector<Mat<T>> h = par_.d2phi(theta);
    Rank3<T> amb = christoffel_from_metric(sys_.inertia, xs);
    Rank3<T> out(r);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t jj = i; jj < r; ++jj) {
        std::vector<T> term(n);
        for (std::size_t a = 0; a < n; ++a) {
          T s = h[a](i, jj);
          for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c) s += j(b, i) * amb(a, b, c) * j(c, jj);
          term[a] = s;
        }
        for (std::size_t k = 0; k < r; ++k) {
          T s(0.0);
          for (std::size_t a = 0; a < n; ++a) s += proj(k, a) * term[a];
          out(k, i, jj) = s;
          out(k, jj, i) = s;
        }
      }
    return out;
  }

  /// λ(θ) = (B⊥ D dφ)⁻¹ B⊥ ∇P at φ(θ).
  template <class T>
  std::vector<T> reduced_potential(std::span<const T> theta) const {
    const std::size_t n = ambient_dim();
    const std::size_t r = reduced_dim();
    std::vector<T> x = par_.phi(theta);
    std::span<const T> xs(x);
    Mat<T> d(n, n, sys_.inertia(xs));
    Mat<T> bp(r, n, sys_.annihilator(xs));
    return solve((bp * d) * par_.dphi(theta), bp * sys_.grad_potential(xs));
  }

  /// Induced connection and λ as evaluable fields on the reduced chart.
  Connection induced_connection() const;
  Field lambda_field() const;

  /// θ-components of σ̂(v) for an ambient vector v at φ(θ).
  std::vector<double> projection_sigma(std::span<const double> theta, std::span<const double> v) const;

  /// θ̈ = −Γ_C(θ̇, θ̇) − λ(θ).
  std::vector<double> constrained_rhs(std::span<const double> theta, std::span<const double> theta_dot) const;

  /// (Ψ₁, Ψ₂) for one-dimensional constraints, from the scalar formulas
  /// with B⊥ D φ' in the denominator. Throws DimensionError unless n−m = 1.
  std::pair<double, double> psi_functions(double theta) const;

  /// Feedback making ḧ = −K_p h − K_d ḣ; with zero gains on T C it is the
  /// unique invariance feedback. Needs the system's constraint h.
  std::vector<double> stabilizing_feedback(std::span<const double> q, std::span<const double> qdot, double kp,
                                           double kd) const;

  /// Full-system acceleration q̈ = −Γ(q̇,q̇) − D⁻¹∇P + D⁻¹Bτ.
  std::vector<double> full_acceleration(std::span<const double> q, std::span<const double> qdot,
                                        std::span<const double> tau) const;

 private:
  LagrangianControlSystem sys_;
  ConstraintParametrization par_;
};

/// Smallest singular-value ratio of [dφ | D⁻¹B] over the grid; regular iff it
/// stays above `tol`.
RegularityReport check_regularity(const ConstrainedSystem& cs, const std::vector<std::vector<double>>& grid,
                                  double tol = 1e-8);

struct OrthogonalityReport {
  bool orthogonal = false;
  double max_defect = 0.0;  // max ‖dφᵀB‖ over the grid
};

/// Control forces orthogonal to the constraint: dφ(θ)ᵀ B(φ(θ)) = 0.
OrthogonalityReport orthogonality_check(const ConstrainedSystem& cs, const std::vector<std::vector<double>>& grid,
                                        double tol = 1e-10);

/// Pull-back metric dφᵀ D dφ and restricted potential P∘φ.
struct RestrictedStructure {
  Field metric;     // reduced dim x reduced dim
  Field potential;  // scalar
};

/// Throws PreconditionError unless the orthogonality check passes.
RestrictedStructure restricted_structure(const ConstrainedSystem& cs, const std::vector<std::vector<double>>& grid,
                                         double tol = 1e-10);

/// max over the grid of |Γ_C^k_{ij} − Γ_C^k_{ji}|, plus structural checks of
/// the system fields (SPD inertia, B⊥B = 0, ∇P consistent with P).
struct ConsistencyReport {
  double min_inertia_eig = 0.0;
  double max_annihilation = 0.0;
  double max_gradient_defect = 0.0;
  double max_dphi_defect = 0.0;
};
ConsistencyReport check_consistency(const ConstrainedSystem& cs, const std::vector<std::vector<double>>& grid);

}  // namespace vhc
