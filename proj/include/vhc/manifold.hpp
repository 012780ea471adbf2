#pragma once

// Single-chart affine and Riemannian geometry. Index convention: Γ^k_{ij}
// multiplies γ̇^i γ̇^j to give the k-th acceleration component; R^l_{ijk}
// is contracted over (l, i) to give Ricci.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vhc/calculus.hpp"
#include "vhc/chart.hpp"
#include "vhc/field.hpp"
#include "vhc/linalg.hpp"

namespace vhc {

/// Christoffel coefficients as an evaluable field x -> n^3 values laid out
/// as Rank3 (k, i, j).
struct Connection {
  Chart chart;
  Field coeffs;
  bool symmetric = true;

  std::size_t dim() const { return chart.dim; }

  template <class T>
  Rank3<T> at(std::span<const T> x) const {
    return Rank3<T>(chart.dim, coeffs(x));
  }
  Rank3<double> at(const std::vector<double>& x) const { return at(std::span<const double>(x)); }

  static Connection zero(const Chart& chart);
};

/// A (0,2) tensor field given by its component matrix field.
struct Tensor02Field {
  Chart chart;
  Field components;  // shape n x n
  bool symmetric = true;
};

/// A parametrized curve in chart coordinates. Velocity comes from the
/// point field by forward-mode differentiation.
struct Curve {
  double t_start = 0.0;
  double t_end = 1.0;
  Field point;  // R -> R^n
  std::vector<double> breakpoints;

  std::vector<double> position(double t) const;
  std::vector<double> velocity(double t) const;
  /// Second derivative; central differences of the velocity.
  std::vector<double> acceleration(double t) const;

  /// Straight segment from a to b over t in [0, 1].
  static Curve segment(std::vector<double> a, std::vector<double> b);
  /// Segment moving only coordinate `axis` from `start` by `length` at unit speed.
  static Curve axis_segment(std::vector<double> start, std::size_t axis, double length);
  /// Constant curve.
  static Curve constant(std::vector<double> p);
  /// Same path traversed backwards.
  Curve reversed() const;
};

// ---------------------------------------------------------------------------

/// Γ^k_{ij} = ½ Σ_l g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}) at x.
/// Throws SingularError when D(x) is singular.
template <class T>
Rank3<T> christoffel_from_metric(const Field& metric, std::span<const T> x) {
  const std::size_t n = x.size();
  Mat<T> g(n, n, metric(x));
  Mat<T> jac = jacobian(metric, x);  // row (a*n+b), column l: ∂_l g_ab
  auto dg = [&](std::size_t l, std::size_t a, std::size_t b) -> const T& { return jac(a * n + b, l); };
  Mat<T> ginv = inverse(g);
  Rank3<T> gamma(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      std::vector<T> lowered(n);
      for (std::size_t l = 0; l < n; ++l) lowered[l] = 0.5 * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
      for (std::size_t k = 0; k < n; ++k) {
        T s(0.0);
        for (std::size_t l = 0; l < n; ++l) s += ginv(k, l) * lowered[l];
        gamma(k, i, j) = s;
        gamma(k, j, i) = s;
      }
    }
  }
  return gamma;
}

inline Rank3<double> christoffel_from_metric(const Field& metric, const std::vector<double>& x) {
  return christoffel_from_metric(metric, std::span<const double>(x));
}

/// Levi-Civita connection of a metric field as an evaluable connection.
Connection levi_civita(const Field& metric, const Chart& chart);

/// Component vector of ∇_Y Z at x: Y(z^k) + Γ^k_{ij} y^i z^j.
std::vector<double> covariant_derivative(const Connection& conn, const Field& y, const Field& z,
                                         std::span<const double> x);

/// γ̈^k + Γ^k_{ij} γ̇^i γ̇^j at t. Throws DomainError at a breakpoint.
std::vector<double> geodesic_residual(const Connection& conn, const Curve& curve, double t);

/// R^l_{ijk} = ∂_i Γ^l_{jk} − ∂_j Γ^l_{ik} + Σ_m (Γ^m_{jk} Γ^l_{im} − Γ^m_{ik} Γ^l_{jm}).
template <class T>
Rank4<T> curvature_coeffs(const Connection& conn, std::span<const T> x) {
  const std::size_t n = conn.dim();
  Rank3<T> g = conn.at(x);
  Mat<T> jac = jacobian(conn.coeffs, x);  // row (l*n+j)*n+k, column i
  auto dgam = [&](std::size_t i, std::size_t l, std::size_t j, std::size_t k) -> const T& {
    return jac((l * n + j) * n + k, i);
  };
  Rank4<T> r(n);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          T s = dgam(i, l, j, k) - dgam(j, l, i, k);
          for (std::size_t m = 0; m < n; ++m) s += g(m, j, k) * g(l, i, m) - g(m, i, k) * g(l, j, m);
          r(l, i, j, k) = s;
        }
  return r;
}

/// Ric_{ij} = Σ_k R^k_{kij}.
template <class T>
Mat<T> ricci(const Connection& conn, std::span<const T> x) {
  const std::size_t n = conn.dim();
  Rank4<T> r = curvature_coeffs(conn, x);
  Mat<T> ric(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T s(0.0);
      for (std::size_t k = 0; k < n; ++k) s += r(k, k, i, j);
      ric(i, j) = s;
    }
  return ric;
}

/// Ricci tensor of a connection as a Tensor02Field.
Tensor02Field ricci_field(const Connection& conn);

/// (∇F)_{ijk} = ∂_i F_{jk} − Σ_m Γ^m_{ij} F_{mk} − Σ_m Γ^m_{ik} F_{jm}, laid
/// out as Rank3 (i, j, k).
template <class T>
Rank3<T> total_cov_derivative_02(const Connection& conn, const Field& f, std::span<const T> x) {
  const std::size_t n = conn.dim();
  Rank3<T> g = conn.at(x);
  Mat<T> fx(n, n, f(x));
  Mat<T> jac = jacobian(f, x);  // row j*n+k, column i
  Rank3<T> out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        T s = jac(j * n + k, i);
        for (std::size_t m = 0; m < n; ++m) s -= g(m, i, j) * fx(m, k) + g(m, i, k) * fx(j, m);
        out(i, j, k) = s;
      }
  return out;
}

// Double-point conveniences.
Rank4<double> curvature_coeffs(const Connection& conn, const std::vector<double>& x);
Mat<double> ricci(const Connection& conn, const std::vector<double>& x);
Rank3<double> total_cov_derivative_02(const Connection& conn, const Field& f, const std::vector<double>& x);

/// max |Γ^k_{ij} − Γ^k_{ji}| over the points.
double symmetry_defect(const Connection& conn, const std::vector<std::vector<double>>& points);
/// max |R^l_{ijk}| over the points.
double max_curvature(const Connection& conn, const std::vector<std::vector<double>>& points);

}  // namespace vhc
