#include "vhc/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "vhc/error.hpp"

namespace vhc {

Connection Connection::zero(const Chart& chart) {
  const std::size_t n = chart.dim;
  Field f = Field::smooth(n, Shape{n * n * n, 1},
                          [n]<class T>(std::span<const T>) { return std::vector<T>(n * n * n, T(0.0)); });
  return Connection{chart, std::move(f), true};
}

Connection levi_civita(const Field& metric, const Chart& chart) {
  const std::size_t n = chart.dim;
  Field f = Field::smooth(n, Shape{n * n * n, 1}, [metric]<class T>(std::span<const T> x) {
    return christoffel_from_metric(metric, x).data;
  });
  return Connection{chart, std::move(f), true};
}

// ---------------------------------------------------------------------------

std::vector<double> Curve::position(double t) const {
  std::vector<double> tt{t};
  return point(std::span<const double>(tt));
}

std::vector<double> Curve::velocity(double t) const {
  std::vector<double> tt{t};
  Mat<double> j = jacobian(point, std::span<const double>(tt));
  return j.data();
}

std::vector<double> Curve::acceleration(double t) const {
  for (double b : breakpoints)
    if (std::abs(t - b) < 1e-12) throw DomainError("acceleration requested at a curve breakpoint");
  if (point.depth() >= 2) {
    std::vector<double> tt{t};
    std::vector<AD2> td{lift<AD2>(t)};
    td[0].v.d = 1.0;
    td[0].d.v = 1.0;
    std::vector<AD2> y = point(std::span<const AD2>(td));
    std::vector<double> a(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) a[i] = y[i].d.d;
    return a;
  }
  const double h = 1e-4 * std::max(1.0, std::abs(t));
  std::vector<double> up = velocity(t + h);
  std::vector<double> down = velocity(t - h);
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = (up[i] - down[i]) / (2.0 * h);
  return up;
}

Curve Curve::segment(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) throw DimensionError("Curve::segment: endpoint dimensions differ");
  const std::size_t n = a.size();
  Field f = Field::smooth(1, Shape{n, 1}, [a, b]<class T>(std::span<const T> t) {
    std::vector<T> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] + (b[i] - a[i]) * t[0];
    return p;
  });
  return Curve{0.0, 1.0, std::move(f), {}};
}

Curve Curve::axis_segment(std::vector<double> start, std::size_t axis, double length) {
  if (axis >= start.size()) throw DimensionError("Curve::axis_segment: axis out of range");
  const std::size_t n = start.size();
  const double dir = length >= 0.0 ? 1.0 : -1.0;
  Field f = Field::smooth(1, Shape{n, 1}, [start, axis, dir]<class T>(std::span<const T> t) {
    std::vector<T> p(start.size());
    for (std::size_t i = 0; i < start.size(); ++i) p[i] = T(start[i]);
    p[axis] = start[axis] + dir * t[0];
    return p;
  });
  return Curve{0.0, std::abs(length), std::move(f), {}};
}

Curve Curve::constant(std::vector<double> p) {
  const std::size_t n = p.size();
  Field f = Field::smooth(1, Shape{n, 1}, [p]<class T>(std::span<const T>) {
    std::vector<T> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = T(p[i]);
    return out;
  });
  return Curve{0.0, 1.0, std::move(f), {}};
}

Curve Curve::reversed() const {
  const double a = t_start;
  const double b = t_end;
  Field inner = point;
  Field f;
  if (!inner.is_black_box()) {
    f = Field::smooth(1, inner.shape(), [inner, a, b]<class T>(std::span<const T> t) {
      std::vector<T> s{a + b - t[0]};
      return inner(std::span<const T>(s));
    });
  } else {
    f = Field::black_box(1, inner.shape(), [inner, a, b](std::span<const double> t) {
      std::vector<double> s{a + b - t[0]};
      return inner(std::span<const double>(s));
    });
  }
  std::vector<double> bps;
  for (auto it = breakpoints.rbegin(); it != breakpoints.rend(); ++it) bps.push_back(a + b - *it);
  return Curve{a, b, std::move(f), std::move(bps)};
}

// ---------------------------------------------------------------------------

std::vector<double> covariant_derivative(const Connection& conn, const Field& y, const Field& z,
                                         std::span<const double> x) {
  const std::size_t n = conn.dim();
  std::vector<double> yv = y(x);
  std::vector<double> zv = z(x);
  Mat<double> dz = jacobian(z, x);
  Rank3<double> g = conn.at(x);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += dz(k, i) * yv[i];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s += g(k, i, j) * yv[i] * zv[j];
    out[k] = s;
  }
  return out;
}

std::vector<double> geodesic_residual(const Connection& conn, const Curve& curve, double t) {
  std::vector<double> acc = curve.acceleration(t);
  std::vector<double> vel = curve.velocity(t);
  std::vector<double> pos = curve.position(t);
  Rank3<double> g = conn.at(pos);
  const std::size_t n = conn.dim();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) acc[k] += g(k, i, j) * vel[i] * vel[j];
  return acc;
}

Tensor02Field ricci_field(const Connection& conn) {
  const std::size_t n = conn.dim();
  Field f = Field::smooth(n, Shape{n, n}, [conn]<class T>(std::span<const T> x) { return ricci(conn, x).data(); });
  return Tensor02Field{conn.chart, std::move(f), conn.symmetric};
}

Rank4<double> curvature_coeffs(const Connection& conn, const std::vector<double>& x) {
  return curvature_coeffs(conn, std::span<const double>(x));
}

Mat<double> ricci(const Connection& conn, const std::vector<double>& x) {
  return ricci(conn, std::span<const double>(x));
}

Rank3<double> total_cov_derivative_02(const Connection& conn, const Field& f, const std::vector<double>& x) {
  return total_cov_derivative_02(conn, f, std::span<const double>(x));
}

double symmetry_defect(const Connection& conn, const std::vector<std::vector<double>>& points) {
  double m = 0.0;
  for (const auto& p : points) {
    Rank3<double> g = conn.at(p);
    for (std::size_t k = 0; k < g.n; ++k)
      for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) m = std::max(m, std::abs(g(k, i, j) - g(k, j, i)));
  }
  return m;
}

double max_curvature(const Connection& conn, const std::vector<std::vector<double>>& points) {
  double m = 0.0;
  for (const auto& p : points) {
    Rank4<double> r = curvature_coeffs(conn, p);
    for (double v : r.data) m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace vhc
