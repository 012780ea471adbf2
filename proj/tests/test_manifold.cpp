#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vhc/manifold.hpp"
#include "vhc/models.hpp"

using namespace vhc;

namespace {

constexpr double kPi = std::numbers::pi;

Field round_sphere_metric() {
  return Field::smooth(2, Shape{2, 2}, []<class T>(std::span<const T> x) {
    using std::sin;
    T s = sin(x[0]);
    return std::vector<T>{T(1.0), T(0.0), T(0.0), s * s};
  });
}

Chart sphere_chart() {
  Chart c = Chart::box({0.0, -kPi}, {kPi, kPi});
  c.periodic = {false, true};
  return c;
}

// Great circle through (1,0,0) tilted by beta, in colatitude/longitude.
Curve great_circle(double beta) {
  Curve c;
  c.t_start = 0.2;
  c.t_end = 1.4;
  c.point = Field::smooth(1, Shape{2, 1}, [beta]<class T>(std::span<const T> t) {
    using std::atan2;
    using std::sqrt;
    using std::cos;
    using std::sin;
    T x = cos(t[0]);
    T y = sin(t[0]) * std::cos(beta);
    T z = sin(t[0]) * std::sin(beta);
    return std::vector<T>{atan2(sqrt(x * x + y * y), z), atan2(y, x)};
  });
  return c;
}

}  // namespace

TEST_CASE("christoffel symbols of simple metrics") {
  Field id = Field::smooth(2, Shape{2, 2}, []<class T>(std::span<const T>) {
    return std::vector<T>{T(1.0), T(0.0), T(0.0), T(1.0)};
  });
  Rank3<double> z = christoffel_from_metric(id, std::vector<double>{0.3, 0.4});
  for (double v : z.data) CHECK(v == 0.0);

  Field g = round_sphere_metric();
  for (double t : {0.3, 1.0, 2.2}) {
    Rank3<double> gam = christoffel_from_metric(g, std::vector<double>{t, 0.5});
    CHECK(gam(0, 1, 1) == doctest::Approx(-std::sin(t) * std::cos(t)).epsilon(1e-13));
    CHECK(gam(1, 0, 1) == doctest::Approx(std::cos(t) / std::sin(t)).epsilon(1e-13));
    CHECK(gam(1, 1, 0) == gam(1, 0, 1));
    CHECK(gam(0, 0, 0) == 0.0);
  }
}

TEST_CASE("christoffel symbols of the cart-pendulum inertia against finite differences") {
  ModelBundle m = double_pendulum_cart(DpcCase::force_on_cart);
  const Field& d = m.system.inertia;
  std::vector<double> q{0.0, kPi / 2, 0.0};
  Rank3<double> gam = christoffel_from_metric(d, q);
  const double h = 1e-5;
  // ∂_l g_ij by central differences, then the textbook formula
  std::vector<Mat<double>> dg;
  for (std::size_t l = 0; l < 3; ++l) {
    auto qp = q, qm = q;
    qp[l] += h;
    qm[l] -= h;
    Mat<double> a(3, 3, d(qp)), b(3, 3, d(qm));
    Mat<double> diff(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) diff(i, j) = (a(i, j) - b(i, j)) / (2 * h);
    dg.push_back(diff);
  }
  Mat<double> ginv = inverse(Mat<double>(3, 3, d(q)));
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double s = 0;
        for (std::size_t l = 0; l < 3; ++l) s += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        CHECK(gam(k, i, j) == doctest::Approx(s).epsilon(1e-8));
      }
}

TEST_CASE("covariant derivative") {
  Connection flat = Connection::zero(Chart::euclidean(2));
  Field c = Field::smooth(2, Shape{2, 1}, []<class T>(std::span<const T>) { return std::vector<T>{T(1.0), T(2.0)}; });
  Field e1 = Field::smooth(2, Shape{2, 1}, []<class T>(std::span<const T>) { return std::vector<T>{T(1.0), T(0.0)}; });
  Field x1 = Field::smooth(2, Shape{2, 1}, []<class T>(std::span<const T> x) { return std::vector<T>{x[0], T(0.0)}; });
  std::vector<double> p{0.3, -0.2};
  for (double v : covariant_derivative(flat, e1, c, p)) CHECK(v == 0.0);
  auto d = covariant_derivative(flat, e1, x1, p);
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 0.0);

  Connection sph = levi_civita(round_sphere_metric(), sphere_chart());
  Field e2 = Field::smooth(2, Shape{2, 1}, []<class T>(std::span<const T>) { return std::vector<T>{T(0.0), T(1.0)}; });
  auto eq = covariant_derivative(sph, e2, e2, std::vector<double>{kPi / 2, 0.4});
  CHECK(std::abs(eq[0]) < 1e-15);
  CHECK(std::abs(eq[1]) < 1e-15);
  auto off = covariant_derivative(sph, e2, e2, std::vector<double>{0.7, 0.4});
  CHECK(off[0] == doctest::Approx(-std::sin(0.7) * std::cos(0.7)));
}

TEST_CASE("geodesic residual") {
  Connection flat = Connection::zero(Chart::euclidean(1));
  Curve line = Curve::segment({0.0}, {2.0});
  CHECK(std::abs(geodesic_residual(flat, line, 0.5)[0]) < 1e-12);
  Curve para;
  para.point = Field::smooth(1, Shape{1, 1}, []<class T>(std::span<const T> t) { return std::vector<T>{t[0] * t[0]}; });
  CHECK(geodesic_residual(flat, para, 0.5)[0] == doctest::Approx(2.0).epsilon(1e-6));

  Connection sph = levi_civita(round_sphere_metric(), sphere_chart());
  for (double beta : {0.0, 0.4, 1.1})
    for (double t : {0.3, 0.8, 1.3})
      for (double r : geodesic_residual(sph, great_circle(beta), t)) CHECK(std::abs(r) < 1e-7);

  // integrate the geodesic equation and compare to the great circle
  const double beta = 0.4;
  Curve gc = great_circle(beta);
  auto x0 = gc.position(0.2);
  auto v0 = gc.velocity(0.2);
  OdeRhs rhs = [&](double, std::span<const double> s, std::span<double> ds) {
    Rank3<double> g = sph.at(std::span<const double>(s.data(), 2));
    for (std::size_t k = 0; k < 2; ++k) {
      ds[k] = s[2 + k];
      double a = 0;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) a -= g(k, i, j) * s[2 + i] * s[2 + j];
      ds[2 + k] = a;
    }
  };
  OdeSolution sol = integrate_ode(rhs, 0.2, {x0[0], x0[1], v0[0], v0[1]}, 1.4);
  auto x1 = gc.position(1.4);
  CHECK(sol.final_state()[0] == doctest::Approx(x1[0]).epsilon(1e-8));
  CHECK(sol.final_state()[1] == doctest::Approx(x1[1]).epsilon(1e-8));
}

TEST_CASE("curvature and Ricci of the round sphere and of flat space") {
  Connection flat = Connection::zero(Chart::euclidean(2));
  for (double v : curvature_coeffs(flat, std::vector<double>{0.1, 0.2}).data) CHECK(v == 0.0);
  Connection sph = levi_civita(round_sphere_metric(), sphere_chart());
  for (double t : {0.4, 1.2, 2.0}) {
    // Gaussian curvature 1: Ric = g
    Mat<double> ric = ricci(sph, std::vector<double>{t, 0.3});
    CHECK(ric(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(ric(0, 1)) < 1e-13);
    CHECK(ric(1, 1) == doctest::Approx(std::sin(t) * std::sin(t)).epsilon(1e-12));
    Rank4<double> r = curvature_coeffs(sph, std::vector<double>{t, 0.3});
    CHECK(r(0, 1, 0, 1) == doctest::Approx(-std::sin(t) * std::sin(t)).epsilon(1e-12));
    CHECK(r(0, 1, 0, 1) == doctest::Approx(-r(0, 0, 1, 1)).epsilon(1e-12));
  }
}

TEST_CASE("metric compatibility of the Levi-Civita connection") {
  Field g = Field::smooth(2, Shape{2, 2}, []<class T>(std::span<const T> x) {
    using std::exp;
    using std::sin;
    T a = 2.0 + sin(x[0] * x[1]);
    T b = 0.3 * x[0];
    T c = exp(0.2 * x[1]) + 1.0;
    return std::vector<T>{a, b, b, c};
  });
  Connection lc = levi_civita(g, Chart::euclidean(2));
  for (double v : total_cov_derivative_02(lc, g, std::vector<double>{0.4, -0.6}).data) CHECK(std::abs(v) < 1e-13);
  CHECK(symmetry_defect(lc, Chart::euclidean(2).grid(4)) < 1e-15);
}

TEST_CASE("sphere constraint: induced curvature data") {
  ModelBundle m = sphere_mass();
  Connection conn = m.constrained().induced_connection();
  Tensor02Field ricf = ricci_field(conn);
  for (const auto& p : m.parametrization.reduced.grid(17, 1e-2)) {
    const double t = p[0];
    const double s2 = std::sin(t) * std::sin(t);
    const double c2 = std::cos(t) * std::cos(t);
    Mat<double> ric = ricci(conn, p);
    CHECK(ric(0, 0) == doctest::Approx(1.0 / (c2 + 1)).epsilon(1e-9));
    CHECK(std::abs(ric(0, 1)) < 1e-9);
    CHECK(std::abs(ric(1, 0)) < 1e-9);
    CHECK(ric(1, 1) == doctest::Approx(2 * s2 / ((s2 - 2) * (s2 - 2))).epsilon(1e-9));
    Rank3<double> dr = total_cov_derivative_02(conn, ricf.components, p);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k) {
          double want = 0;
          if (i == 0 && j == 0 && k == 0) want = 2 * std::sin(2 * t) / ((c2 + 1) * (c2 + 1));
          if (i == 0 && j == 1 && k == 1) want = -4 * std::sin(2 * t) * s2 / std::pow(s2 - 2, 3);
          CHECK(dr(i, j, k) == doctest::Approx(want).epsilon(1e-8).scale(1.0));
        }
    // contraction oracle: R^1_{212} relates to Ric_22
    Rank4<double> r = curvature_coeffs(conn, p);
    CHECK(r(0, 0, 1, 1) + r(1, 1, 1, 1) == doctest::Approx(ric(1, 1)).epsilon(1e-12));
  }
}

TEST_CASE("cart-pendulum induced connections are flat") {
  for (DpcCase c : {DpcCase::force_on_cart, DpcCase::torque_on_last_joint}) {
    ModelBundle m = double_pendulum_cart(c);
    Connection conn = m.constrained().induced_connection();
    CHECK(max_curvature(conn, m.standard_grid()) < 1e-8);
    Mat<double> ric = ricci(conn, std::vector<double>{0.2, 1.0});
    for (double v : ric.data()) CHECK(std::abs(v) < 1e-8);
  }
}
