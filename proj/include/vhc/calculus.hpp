#pragma once

// Numerical kernels shared by every module: derivatives of evaluable
// fields, 1-D quadrature, and explicit Runge-Kutta integration with dense
// output.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "vhc/chart.hpp"
#include "vhc/dual.hpp"
#include "vhc/field.hpp"
#include "vhc/linalg.hpp"

namespace vhc {

// ---------------------------------------------------------------------------
// Derivatives

/// Jacobian of `f` at x, shape out_dim x in_dim. Works at any scalar level
/// the field supports one level deeper; black-box fields are differenced.
template <class T>
Mat<T> jacobian(const Field& f, std::span<const T> x) {
  const std::size_t n = x.size();
  Mat<T> jac(f.out_dim(), n);
  std::vector<Dual<T>> xd(n);
  for (std::size_t i = 0; i < n; ++i) xd[i] = Dual<T>(x[i], T(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    xd[i].d = T(1.0);
    std::vector<Dual<T>> y = f(std::span<const Dual<T>>(xd));
    for (std::size_t r = 0; r < y.size(); ++r) jac(r, i) = y[r].d;
    xd[i].d = T(0.0);
  }
  return jac;
}

/// All second partials of component `comp` of `f`: H(i, j) = ∂i∂j f_comp.
template <class T>
Mat<T> hessian(const Field& f, std::span<const T> x, std::size_t comp = 0) {
  using D2 = Dual<Dual<T>>;
  const std::size_t n = x.size();
  Mat<T> hess(n, n);
  std::vector<D2> xd(n);
  for (std::size_t i = 0; i < n; ++i) xd[i] = lift<D2>(x[i]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      xd[i].v.d = T(1.0);
      xd[j].d.v = T(1.0);
      std::vector<D2> y = f(std::span<const D2>(xd));
      hess(i, j) = y[comp].d.d;
      hess(j, i) = hess(i, j);
      xd[i].v.d = T(0.0);
      xd[j].d.v = T(0.0);
    }
  }
  return hess;
}

/// ∂f/∂x^i of a scalar field at a double point. Forward-mode when the field
/// is smooth, central differences with step h·max(1, |x^i|) otherwise.
/// Throws DomainError on a non-finite input or result.
double partial(const Field& f, std::span<const double> x, std::size_t i);
/// Same, after checking that x lies in the chart domain.
double partial(const Field& f, const Chart& chart, std::span<const double> x, std::size_t i);

/// ∂²f/∂x^i∂x^j of a scalar field. Nested duals when available, nested
/// central differences (relative step 1e-4) for black boxes.
double second_partial(const Field& f, std::span<const double> x, std::size_t i, std::size_t j);

// ---------------------------------------------------------------------------
// Quadrature

struct QuadOptions {
  double tol = 1e-10;
  unsigned max_depth = 12;
  /// Absolute targets below rel_floor * ∫|f| are unreachable in double
  /// precision; the accepted error is max(tol, rel_floor * L1).
  double rel_floor = 1e-13;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b] with at most
/// 2^max_depth panels. The error target is absolute (see rel_floor). Throws
/// IntegrationError if it is not met.
double quad(const std::function<double(double)>& f, double a, double b, const QuadOptions& opts = {});

inline double quad(const std::function<double(double)>& f, double a, double b, double tol) {
  return quad(f, a, b, QuadOptions{tol});
}

// ---------------------------------------------------------------------------
// ODE integration

using OdeRhs = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;
using OdeGuard = std::function<bool(double t, std::span<const double> x)>;

enum class OdeMethod { rk4, rk45 };

struct OdeOptions {
  OdeMethod method = OdeMethod::rk45;
  /// Per-step tolerance (absolute and relative) for rk45.
  double tol = 1e-10;
  /// Fixed step for rk4, initial step guess for rk45 (0 = automatic).
  double step = 1e-3;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-13;
  std::size_t max_steps = 5'000'000;
  /// Called after every accepted step; returning false aborts.
  OdeGuard guard;
};

/// Dense solution of an initial-value problem. Integration may run forward
/// or backward in time; `at` interpolates anywhere between the end points.
class OdeSolution {
 public:
  double t_start() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  std::size_t dim() const { return dim_; }
  std::size_t steps() const { return steps_.size(); }

  /// Accepted step end points (including the initial time).
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::vector<double>>& states() const { return states_; }
  const std::vector<double>& final_state() const { return states_.back(); }

  std::vector<double> at(double t) const;

 private:
  friend OdeSolution integrate_ode(const OdeRhs&, double, std::vector<double>, double, const OdeOptions&);

  struct Step {
    double t0;
    double h;
    // Interpolation coefficients in Hairer's continuous-extension form;
    // c[4] is zero for the cubic Hermite (rk4) case.
    std::vector<double> c[5];
  };

  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<std::vector<double>> states_;
  std::vector<Step> steps_;
};

/// Integrate x' = rhs(t, x) from (t0, x0) to t1. rk45 is Dormand-Prince 5(4)
/// with its 4th-order continuous extension; rk4 is the classical scheme with
/// cubic Hermite interpolation. Throws IntegrationError on step underflow,
/// guard violation, or exhausting max_steps.
OdeSolution integrate_ode(const OdeRhs& rhs, double t0, std::vector<double> x0, double t1,
                          const OdeOptions& opts = {});

}  // namespace vhc
