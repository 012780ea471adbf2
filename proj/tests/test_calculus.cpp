#include <cmath>
#include <numbers>

#include "doctest.h"
#include "vhc/calculus.hpp"

using namespace vhc;

namespace {

Field scalar(auto fn) {
  return Field::smooth(2, [fn]<class T>(std::span<const T> x) { return std::vector<T>{fn(x[0], x[1])}; });
}

}  // namespace

TEST_CASE("partial derivatives") {
  Field prod = scalar([](auto a, auto b) { return a * b; });
  CHECK(partial(prod, std::vector<double>{2, 3}, 0) == 3.0);

  Field s = Field::smooth(1, []<class T>(std::span<const T> x) { using std::sin; return std::vector<T>{sin(x[0])}; });
  CHECK(partial(s, std::vector<double>{0.0}, 0) == 1.0);

  Field e = scalar([](auto a, auto b) { using std::exp; return exp(a * b); });
  const double ad = partial(e, std::vector<double>{1, 1}, 1);
  CHECK(ad == doctest::Approx(std::numbers::e).epsilon(1e-15));
  for (double h : {1e-5, 1e-6}) {
    const double fd = (std::exp(1 + h) - std::exp(1 - h)) / (2 * h);
    CHECK(ad == doctest::Approx(fd).epsilon(1e-8));
  }
  CHECK_THROWS_AS(partial(prod, std::vector<double>{NAN, 1.0}, 0), DomainError);
}

TEST_CASE("second partials") {
  Field prod = scalar([](auto a, auto b) { return a * b; });
  CHECK(second_partial(prod, std::vector<double>{-4, 7}, 0, 1) == 1.0);
  Field c = Field::smooth(1, []<class T>(std::span<const T> x) { using std::cos; return std::vector<T>{cos(x[0])}; });
  CHECK(second_partial(c, std::vector<double>{0.0}, 0, 0) == doctest::Approx(-1.0));
  Field e = scalar([](auto a, auto b) { using std::exp; return exp(a + 2.0 * b); });
  CHECK(second_partial(e, std::vector<double>{0, 0}, 1, 1) == doctest::Approx(4.0).epsilon(1e-14));
  // nested central differences as an independent estimate
  const double h = 1e-4;
  auto f = [](double b) { return std::exp(2 * b); };
  CHECK(second_partial(e, std::vector<double>{0, 0}, 1, 1) ==
        doctest::Approx((f(h) - 2 * f(0) + f(-h)) / (h * h)).epsilon(1e-6));
}

TEST_CASE("quadrature") {
  CHECK(std::abs(quad([](double t) { return std::sin(t); }, 0, kTwoPi)) < 1e-12);
  CHECK(quad([](double t) { return t * t; }, 0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(quad([](double t) { return t * t; }, 1, 0) == doctest::Approx(-1.0 / 3).epsilon(1e-14));

  // Composite Simpson at doubling resolutions converges to the same number.
  auto g = [](double t) { return std::exp(std::sin(t)); };
  auto simpson = [&](int n) {
    const double h = kTwoPi / n;
    double s = g(0) + g(kTwoPi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * g(i * h);
    return s * h / 3;
  };
  const double s1 = simpson(512);
  const double s2 = simpson(1024);
  CHECK(std::abs(s1 - s2) < 1e-12);
  CHECK(quad(g, 0, kTwoPi) == doctest::Approx(s2).epsilon(1e-12));
  // 2π I0(1)
  CHECK(quad(g, 0, kTwoPi) == doctest::Approx(kTwoPi * std::cyl_bessel_i(0.0, 1.0)).epsilon(1e-13));
}

TEST_CASE("quadrature of near-zero integrands terminates quickly") {
  // odd integrand with a large L1 norm: the answer is 0 and only the
  // relative floor can be met
  auto f = [](double t) { return 1e3 * std::sin(t) * std::exp(std::cos(t)); };
  CHECK(std::abs(quad(f, -std::numbers::pi, std::numbers::pi, 1e-13)) < 1e-9);
  CHECK(quad([](double) { return 0.0; }, 0, 1) == 0.0);
  CHECK_THROWS_AS(quad([](double t) { return 1.0 / std::sqrt(std::abs(t - 0.3)); }, 0, 1,
                       QuadOptions{1e-14, 4, 0.0}),
                  IntegrationError);
}

TEST_CASE("ode: constant, exponential, dense output") {
  OdeRhs zero = [](double, std::span<const double>, std::span<double> dx) { dx[0] = 0.0; };
  OdeSolution c = integrate_ode(zero, 0, {2.5}, 3);
  CHECK(c.final_state()[0] == 2.5);

  OdeRhs grow = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0]; };
  for (OdeMethod m : {OdeMethod::rk45, OdeMethod::rk4}) {
    OdeOptions o;
    o.method = m;
    OdeSolution s = integrate_ode(grow, 0, {1.0}, 1, o);
    CHECK(s.final_state()[0] == doctest::Approx(std::numbers::e).epsilon(1e-9));
    for (double t : {0.1, 0.37, 0.5, 0.93}) CHECK(s.at(t)[0] == doctest::Approx(std::exp(t)).epsilon(1e-8));
  }
  OdeSolution back = integrate_ode(grow, 1, {std::numbers::e}, 0);
  CHECK(back.final_state()[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ode: harmonic oscillator energy drift over [0, 100]") {
  OdeRhs osc = [](double, std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = -x[0];
  };
  OdeSolution s = integrate_ode(osc, 0, {1.0, 0.0}, 100);
  double drift = 0;
  for (const auto& x : s.states()) drift = std::max(drift, std::abs(0.5 * (x[0] * x[0] + x[1] * x[1]) - 0.5));
  CHECK(drift < 1e-8);
  CHECK(s.final_state()[0] == doctest::Approx(std::cos(100.0)).epsilon(1e-7));
}

TEST_CASE("ode: guard and step budget") {
  OdeRhs grow = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0]; };
  OdeOptions o;
  o.guard = [](double, std::span<const double> x) { return x[0] < 2.0; };
  CHECK_THROWS_AS(integrate_ode(grow, 0, {1.0}, 5, o), IntegrationError);
  OdeOptions tight;
  tight.max_steps = 3;
  CHECK_THROWS_AS(integrate_ode(grow, 0, {1.0}, 5, tight), IntegrationError);
}
