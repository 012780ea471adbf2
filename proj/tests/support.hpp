#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "vhc/field.hpp"
#include "vhc/holonomy.hpp"
#include "vhc/linalg.hpp"
#include "vhc/models.hpp"

namespace vhc::testing {

inline double max_abs_diff(const Mat<double>& a, const Mat<double>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

inline std::vector<double> loop_base(const ModelBundle& m) {
  if (!m.generators.empty()) return m.generators.front().base;
  const Chart& c = m.parametrization.reduced;
  std::vector<double> b(c.dim, 0.0);
  for (std::size_t i = 0; i < c.dim; ++i)
    if (!c.periodic[i] && std::isfinite(c.lo[i]) && std::isfinite(c.hi[i])) b[i] = 0.5 * (c.lo[i] + c.hi[i]);
  return b;
}

// Piecewise-linear loop through 1-3 random waypoints of the standard grid's
// bounding box, optionally wound once around a generator (either way).
inline LoopDescriptor random_loop(const ModelBundle& m, std::mt19937_64& rng) {
  const auto grid = m.standard_grid();
  const std::size_t n = m.parametrization.dim();
  std::vector<double> lo(n, INFINITY), hi(n, -INFINITY);
  for (const auto& p : grid)
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> base = loop_base(m);
  std::vector<std::vector<double>> pts{base};
  const int k = 1 + static_cast<int>(u(rng) * 3);
  for (int j = 0; j < k; ++j) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = lo[i] + (hi[i] - lo[i]) * (0.05 + 0.9 * u(rng));
    pts.push_back(w);
  }
  pts.push_back(base);
  Path path;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) path.segments.push_back(Curve::segment(pts[j], pts[j + 1]));
  LoopDescriptor loop{base, path, "random"};
  if (!m.generators.empty() && u(rng) < 0.5) {
    LoopDescriptor g = m.generators.front();
    g.base = base;
    loop = u(rng) < 0.5 ? loop.then(g) : g.inverse().then(loop);
  }
  return loop;
}

struct GroupLawDefects {
  double inverse = 0.0;
  double concatenation = 0.0;
};

// max over `count` random loops of |P(γ⁻¹) P(γ) − I| and |P(γ·δ) − P(δ) P(γ)|.
inline GroupLawDefects group_law_defects(const ModelBundle& m, std::size_t count, std::uint64_t seed,
                                         double tol = 1e-11) {
  std::mt19937_64 rng(seed);
  const Connection conn = m.constrained().induced_connection();
  const std::size_t n = m.parametrization.dim();
  GroupLawDefects d;
  for (std::size_t k = 0; k < count; ++k) {
    LoopDescriptor a = random_loop(m, rng);
    LoopDescriptor b = random_loop(m, rng);
    Mat<double> pa = loop_transport(conn, a, tol).matrix;
    Mat<double> pb = loop_transport(conn, b, tol).matrix;
    Mat<double> pinv = loop_transport(conn, a.inverse(), tol).matrix;
    Mat<double> pab = loop_transport(conn, a.then(b), tol).matrix;
    d.inverse = std::max(d.inverse, max_abs_diff(pinv * pa, Mat<double>::identity(n)));
    d.concatenation = std::max(d.concatenation, max_abs_diff(pab, pb * pa));
  }
  return d;
}

// Random metric with nowhere-vanishing Gauss curvature on [-1, 1]², pulled
// back by a random shear so that it has off-diagonal terms.
//   family 0: e^{2u}(dx² + dy²), u = c(x² + y²) + px + qy, K = −4c e^{−2u}
//   family 1: dx² + e^{2p(x)} dy², p = cx² + px, K = −(2c + (2cx + p)²)
inline Field random_metric(std::mt19937_64& rng, int family) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double c = (0.2 + 0.3 * std::abs(u(rng))) * (family == 0 && u(rng) < 0 ? -1 : 1);
  const double p = 0.5 * u(rng);
  const double q = 0.5 * u(rng);
  const double s = 0.4 * u(rng);  // shear
  return Field::smooth(2, Shape{2, 2}, [=]<class T>(std::span<const T> y) {
    using std::exp;
    T x0 = y[0] + s * y[1];
    T x1 = y[1];
    T g00, g11;
    if (family == 0) {
      T e = exp(2.0 * (c * (x0 * x0 + x1 * x1) + p * x0 + q * x1));
      g00 = e;
      g11 = e;
    } else {
      g00 = T(1.0);
      g11 = exp(2.0 * (c * x0 * x0 + p * x0));
    }
    // Aᵀ g A with A = [[1, s], [0, 1]]
    return std::vector<T>{g00, s * g00, s * g00, s * s * g00 + g11};
  });
}

}  // namespace vhc::testing
