#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vhc/models.hpp"

using namespace vhc;

namespace {

std::vector<double> th(double a) { return {a}; }
std::vector<double> th(double a, double b) { return {a, b}; }

}  // namespace

TEST_CASE("circle: induced symbol is tan(alpha) and psi2 = -tan(alpha)") {
  for (double alpha : {0.0, 0.3, std::numbers::pi / 6, -0.4}) {
    ModelBundle m = circle_particle(alpha);
    ConstrainedSystem cs = m.constrained();
    for (const auto& p : m.standard_grid()) {
      Rank3<double> g = cs.induced_christoffels(std::span<const double>(p));
      CHECK(g(0, 0, 0) == doctest::Approx(std::tan(alpha)).epsilon(1e-12));
      auto [psi1, psi2] = cs.psi_functions(p[0]);
      CHECK(std::abs(psi1) < 1e-15);
      CHECK(psi2 == doctest::Approx(-std::tan(alpha)).epsilon(1e-12));
    }
  }
}

TEST_CASE("circle: annihilator kills the input and regularity shrinks toward pi/2") {
  double prev = 1.0;
  for (double alpha : {0.0, 0.5, 1.0, 1.4, std::numbers::pi / 2 - 1e-3}) {
    ModelBundle m = circle_particle(alpha);
    ConstrainedSystem cs = m.constrained();
    ConsistencyReport c = check_consistency(cs, m.standard_grid());
    CHECK(c.max_annihilation < 1e-14);
    RegularityReport r = check_regularity(cs, m.standard_grid());
    CHECK(r.regular);
    CHECK(r.min_ratio < prev + 1e-12);
    prev = r.min_ratio;
  }
  CHECK(prev < 1e-2);
  CHECK_THROWS_AS(circle_particle(2.0), DomainError);
}

TEST_CASE("sphere: induced symbols match the closed forms") {
  ModelBundle m = sphere_mass();
  ConstrainedSystem cs = m.constrained();
  for (const auto& p : m.parametrization.reduced.grid(17, 1e-2)) {
    Rank3<double> g = cs.induced_christoffels(std::span<const double>(p));
    const double t = p[0];
    const double c2 = std::cos(t) * std::cos(t);
    CHECK(g(0, 0, 0) == doctest::Approx(-std::sin(2 * t) / (2 * (c2 + 1))).epsilon(1e-10));
    CHECK(g(0, 1, 1) == doctest::Approx(-std::sin(2 * t) / (c2 + 1)).epsilon(1e-10));
    CHECK(std::abs(g(0, 0, 1)) < 1e-12);
    CHECK(std::abs(g(1, 0, 0)) < 1e-12);
    CHECK(std::abs(g(1, 1, 1)) < 1e-12);
    CHECK(g(1, 0, 1) == doctest::Approx(1.0 / std::tan(t)).epsilon(1e-10));
  }
  Rank3<double> g = cs.induced_christoffels(std::span<const double>(th(std::numbers::pi / 4, 0.3)));
  CHECK(g(1, 0, 1) == doctest::Approx(m.expected.at("Gamma212_at_pi_over_4")).epsilon(1e-12));
}

TEST_CASE("sphere: consistency and regularity on the standard grid") {
  ModelBundle m = sphere_mass();
  ConstrainedSystem cs = m.constrained();
  ConsistencyReport c = check_consistency(cs, m.standard_grid());
  CHECK(c.min_inertia_eig == doctest::Approx(1.0));
  CHECK(c.max_annihilation < 1e-14);
  CHECK(c.max_dphi_defect < 1e-8);
  CHECK(check_regularity(cs, m.standard_grid()).regular);
}

TEST_CASE("dpc: rho is odd, periodic and continuous through pi") {
  const double r2 = std::sqrt(2.0);
  for (double t = -3.0; t <= 3.0; t += 0.1) {
    const double naive = t + 2.0 * std::atan((1.0 + r2) * std::tan(-t / 2.0));
    CHECK(dpc_rho(t) == doctest::Approx(naive).epsilon(1e-12));
    CHECK(std::abs(dpc_rho(t) + dpc_rho(-t)) < 1e-15);
    CHECK(std::abs(dpc_rho(t + kTwoPi) - dpc_rho(t)) < 1e-13);
  }
  CHECK(dpc_rho(0.0) == 0.0);
  CHECK(std::abs(dpc_rho(std::numbers::pi)) < 1e-15);
  double prev = dpc_rho(std::numbers::pi - 1e-3);
  for (double t = std::numbers::pi - 1e-3; t < std::numbers::pi + 1e-3; t += 1e-6) {
    CHECK(std::abs(dpc_rho(t) - prev) < 1e-5);
    prev = dpc_rho(t);
  }
}

TEST_CASE("dpc: structure of the induced connection and oddness") {
  for (DpcCase which : {DpcCase::force_on_cart, DpcCase::torque_on_last_joint}) {
    ModelBundle m = double_pendulum_cart(which);
    ConstrainedSystem cs = m.constrained();
    CHECK(check_regularity(cs, m.standard_grid()).regular);
    ConsistencyReport c = check_consistency(cs, m.standard_grid());
    CHECK(c.min_inertia_eig > 0.0);
    CHECK(c.max_annihilation == 0.0);
    CHECK(c.max_gradient_defect < 1e-6);
    for (const auto& p : m.standard_grid()) {
      Rank3<double> g = cs.induced_christoffels(std::span<const double>(p));
      Rank3<double> g0 = cs.induced_christoffels(std::span<const double>(th(0.0, p[1])));
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < 2; ++i)
          for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(g(k, i, j) - g0(k, i, j)) < 1e-12);
            if (!(i == 1 && j == 1)) CHECK(std::abs(g(k, i, j)) < 1e-12);
          }
      Rank3<double> gm = cs.induced_christoffels(std::span<const double>(th(p[0], -p[1])));
      CHECK(std::abs(g(0, 1, 1) + gm(0, 1, 1)) < 1e-9);
      CHECK(std::abs(g(1, 1, 1) + gm(1, 1, 1)) < 1e-9);
      std::vector<double> l = cs.reduced_potential(std::span<const double>(p));
      std::vector<double> lm = cs.reduced_potential(std::span<const double>(th(p[0], -p[1])));
      CHECK(std::abs(l[0] + lm[0]) < 1e-9);
      CHECK(std::abs(l[1] + lm[1]) < 1e-9);
    }
  }
}

TEST_CASE("dpc: constrained dynamics agree with projecting the full equations") {
  // Independent oracle: B⊥ (D q̈ + C q̇ + ∇P) = 0 with q̈ = dφ θ̈ + φ''(θ̇, θ̇).
  ModelBundle m = double_pendulum_cart(DpcCase::torque_on_last_joint);
  ConstrainedSystem cs = m.constrained();
  std::vector<double> theta{0.4, 1.1};
  std::vector<double> thd{0.7, -1.3};
  std::vector<double> acc = cs.constrained_rhs(theta, thd);
  std::vector<double> q = m.parametrization.phi(theta);
  Mat<double> j = m.parametrization.dphi(std::span<const double>(theta));
  auto h = m.parametrization.d2phi(std::span<const double>(theta));
  std::vector<double> qd = j * thd;
  std::vector<double> qdd = j * acc;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 2; ++k) qdd[a] += h[a](i, k) * thd[i] * thd[k];
  std::vector<double> tau0{0.0};
  std::vector<double> free_acc = cs.full_acceleration(q, qd, tau0);
  // D(q̈ − q̈_free) must lie in the image of B: its B⊥ part vanishes.
  Mat<double> d(3, 3, m.system.inertia(q));
  std::vector<double> diff(3);
  for (std::size_t a = 0; a < 3; ++a) diff[a] = qdd[a] - free_acc[a];
  std::vector<double> force = d * diff;
  Mat<double> bp(2, 3, m.system.annihilator(q));
  for (double v : bp * force) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("registry") {
  for (const auto& name : model_names()) CHECK(make_model(name).name == name);
  CHECK(make_model("circle", {{"alpha", 0.3}}).params.at("alpha") == 0.3);
  CHECK(make_model("dpc-b", {{"G", 1.0}}).params.at("G") == 1.0);
  CHECK_THROWS_AS(make_model("nope"), DomainError);
  CHECK_THROWS_AS(make_model("sphere", {{"alpha", 1.0}}), DomainError);
}
