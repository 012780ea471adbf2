#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "vhc/holonomy.hpp"
#include "vhc/models.hpp"

using namespace vhc;
using vhc::testing::max_abs_diff;

namespace {

constexpr double kPi = std::numbers::pi;

// Connection on R x S¹ whose only nonzero symbols are Γ¹₂₂ = sin θ² and
// Γ²₂₂ = cos θ².
Connection synthetic_cylinder() {
  Field f = Field::smooth(2, Shape{8, 1}, []<class T>(std::span<const T> x) {
    using std::cos;
    using std::sin;
    std::vector<T> g(8, T(0.0));
    g[0 * 4 + 1 * 2 + 1] = sin(x[1]);
    g[1 * 4 + 1 * 2 + 1] = cos(x[1]);
    return g;
  });
  return Connection{Chart::cylinder({false, true}), f, true};
}

}  // namespace

TEST_CASE("transport along trivial paths and round trips") {
  ModelBundle s = sphere_mass();
  Connection conn = s.constrained().induced_connection();
  std::vector<double> v0{0.3, -1.2};
  auto c = parallel_transport(conn, Curve::constant({1.0, 0.5}), v0);
  CHECK(c == v0);

  Connection flat = Connection::zero(Chart::euclidean(2));
  auto f = parallel_transport(flat, Curve::segment({0, 0}, {3, -2}), v0);
  CHECK(f[0] == doctest::Approx(v0[0]));
  CHECK(f[1] == doctest::Approx(v0[1]));

  Path p{{Curve::segment({0.5, 0.0}, {1.4, 2.0}), Curve::segment({1.4, 2.0}, {2.5, -1.0})}};
  auto there = parallel_transport(conn, p, v0);
  auto back = parallel_transport(conn, p.inverse(), there);
  CHECK(std::abs(back[0] - v0[0]) < 1e-9);
  CHECK(std::abs(back[1] - v0[1]) < 1e-9);
  CHECK(std::abs(there[0] - v0[0]) + std::abs(there[1] - v0[1]) > 1e-3);
}

TEST_CASE("loop transports with known answers") {
  for (DpcCase c : {DpcCase::force_on_cart, DpcCase::torque_on_last_joint}) {
    ModelBundle m = double_pendulum_cart(c);
    Connection conn = m.constrained().induced_connection();
    TransportMap t = loop_transport(conn, m.generators.front());
    CHECK(max_abs_diff(t.matrix, Mat<double>::identity(2)) < 1e-7);
  }
  for (double alpha : {0.0, 0.3, -0.4}) {
    ModelBundle m = circle_particle(alpha);
    Connection conn = m.constrained().induced_connection();
    // Ẋ = −tan α X over a 2π loop
    TransportMap t = loop_transport(conn, m.generators.front());
    CHECK(t.matrix(0, 0) == doctest::Approx(std::exp(-kTwoPi * std::tan(alpha))).epsilon(1e-10));
    CHECK(loop_transport(conn, LoopDescriptor::constant({1.0})).matrix(0, 0) == 1.0);
  }
}

TEST_CASE("group laws on random loops") {
  for (const char* name : {"circle", "sphere", "dpc-a", "dpc-b"}) {
    ModelBundle m = make_model(name, std::string(name) == "circle" ? std::map<std::string, double>{{"alpha", 0.3}}
                                                                     : std::map<std::string, double>{});
    auto d = vhc::testing::group_law_defects(m, 8, 11);
    CAPTURE(name);
    CHECK(d.inverse < 1e-8);
    CHECK(d.concatenation < 1e-8);
  }
}

TEST_CASE("flat metrizability") {
  Connection flat = Connection::zero(Chart::cylinder({false, true}));
  std::vector<LoopDescriptor> gens{LoopDescriptor::generator({0.0, 0.0}, 1, "g")};
  auto grid = flat.chart.grid(5);
  FlatMetrizability fz = flat_metrizability(flat, gens, grid);
  CHECK(fz.metrizable);
  CHECK(max_abs_diff(fz.g0, Mat<double>::identity(2)) < 1e-12);
  CHECK(fz.invariant_basis.size() == 3);

  ModelBundle b = double_pendulum_cart(DpcCase::torque_on_last_joint);
  FlatMetrizability fb = flat_metrizability(b.constrained().induced_connection(), b.generators, b.standard_grid());
  CHECK(fb.metrizable);
  CHECK(fb.invariant_basis.size() == 3);

  ModelBundle c = circle_particle(0.3);
  FlatMetrizability fc = flat_metrizability(c.constrained().induced_connection(), c.generators, c.standard_grid());
  CHECK_FALSE(fc.metrizable);

  ModelBundle s = sphere_mass();
  CHECK_THROWS_AS(flat_metrizability(s.constrained().induced_connection(), s.generators, s.standard_grid()),
                  PreconditionError);
}

TEST_CASE("metric by transport") {
  Connection flat = Connection::zero(Chart::euclidean(2));
  Mat<double> g0(2, 2, {2.0, 0.3, 0.3, 1.0});
  Mat<double> g = metric_by_transport(flat, g0, Path{{Curve::segment({0, 0}, {1.5, -0.7})}});
  CHECK(max_abs_diff(g, g0) < 1e-12);

  // cart-pendulum: compare with the closed form in I₁, I₂ computed by quadrature
  ModelBundle m = double_pendulum_cart(DpcCase::torque_on_last_joint);
  ConstrainedSystem cs = m.constrained();
  Connection conn = cs.induced_connection();
  auto sym = [&](std::size_t k, double t) {
    std::vector<double> th{0.0, t};
    return cs.induced_christoffels(std::span<const double>(th))(k, 1, 1);
  };
  auto i1 = [&](double t) { return quad([&](double s) { return -sym(1, s); }, 0, t, 1e-12); };
  auto i2 = [&](double t) { return quad([&](double s) { return sym(0, s) * std::exp(i1(s)); }, 0, t, 1e-10); };
  const double a = -0.5, bb = 1.0;
  Mat<double> G(2, 2, {1.0, a, a, bb});
  for (double t : {0.7, 2.0, 3.5, 5.9}) {
    Mat<double> d = metric_by_transport(conn, G, Path{{Curve::segment({0.0, 0.0}, {0.4, t})}});
    const double I1 = i1(t), I2 = i2(t);
    const double e = std::exp(-I1);
    CHECK(d(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(d(0, 1) == doctest::Approx(e * (I2 + a)).epsilon(1e-7));
    CHECK(d(1, 1) == doctest::Approx(e * e * (I2 * I2 + 2 * a * I2 + bb)).epsilon(1e-7));
  }

  // 1-D: M(θ) = exp(−2∫Ψ₂) = exp(2θ tan α) on the lift
  Connection cc = circle_particle(0.3).constrained().induced_connection();
  for (double x : {0.5, 3.0, 8.0}) {
    Mat<double> mx = metric_by_transport(cc, Mat<double>::identity(1), Path{{Curve::segment({0.0}, {x})}});
    CHECK(mx(0, 0) == doctest::Approx(std::exp(2 * x * std::tan(0.3))).epsilon(1e-9));
  }
}

TEST_CASE("cylinder integrals") {
  CylinderIntegrals z = cylinder_integrals(Connection::zero(Chart::cylinder({false, true})));
  CHECK(z.i1(2.0) == 0.0);
  CHECK(z.i2(2.0) == 0.0);

  ModelBundle b = double_pendulum_cart(DpcCase::torque_on_last_joint);
  CylinderIntegrals ci = cylinder_integrals(b.constrained().induced_connection());
  CHECK(std::abs(ci.i1_period) < 1e-9);
  CHECK(std::abs(ci.i2_period) < 1e-9);
  Mat<double> p = cylinder_transport(ci, kTwoPi);
  CHECK(max_abs_diff(p, Mat<double>::identity(2)) < 1e-9);

  CylinderIntegrals s = cylinder_integrals(synthetic_cylinder());
  CHECK(std::abs(s.i1_period) < 1e-10);
  for (double t : {1.0, 3.0, kTwoPi}) {
    CHECK(s.i1(t) == doctest::Approx(-std::sin(t)).epsilon(1e-9));
    const double want = quad([](double u) { return std::sin(u) * std::exp(-std::sin(u)); }, 0, t, 1e-12);
    CHECK(s.i2(t) == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK_THROWS_AS(cylinder_integrals(sphere_mass().constrained().induced_connection()), PreconditionError);
}

TEST_CASE("one-dimensional decision") {
  auto zero = [](double) { return 0.0; };
  OneDimReport line = metrizability_1d([](double t) { return std::cos(t) + 0.5; }, false);
  CHECK(line.metrizable);

  OneDimReport c0 = lagrangian_1d(zero, zero, true);
  CHECK(c0.lagrangian);
  for (double t : {0.0, 1.0, 4.0}) {
    CHECK(c0.m(t) == doctest::Approx(1.0));
    CHECK(std::abs(c0.p_c(t)) < 1e-14);
  }

  const double tn = std::tan(0.3);
  OneDimReport c3 = metrizability_1d([tn](double) { return -tn; }, true);
  CHECK_FALSE(c3.metrizable);
  CHECK(c3.int_psi2 == doctest::Approx(-kTwoPi * tn).epsilon(1e-12));

  auto psi2 = [](double t) { return std::sin(t); };
  OneDimReport s = lagrangian_1d(zero, psi2, true);
  CHECK(s.metrizable);
  CHECK(s.lagrangian);
  for (double x : {0.3, 2.0, 5.0, 9.0}) CHECK(s.m_hat(x) == doctest::Approx(std::exp(2 * (std::cos(x) - 1))).epsilon(1e-9));
  std::vector<std::pair<double, double>> states;
  for (double t = 0; t < kTwoPi; t += 0.4) states.push_back({t, std::cos(3 * t)});
  CHECK(el_residual_1d(s, zero, psi2, states) < 1e-8);

  // with a potential that is not periodic after weighting: Lagrangian fails
  OneDimReport g = lagrangian_1d([](double) { return -1.0; }, zero, true);
  CHECK(g.metrizable);
  CHECK_FALSE(g.lagrangian);
  CHECK(g.int_psi1_m == doctest::Approx(-kTwoPi).epsilon(1e-10));
}
