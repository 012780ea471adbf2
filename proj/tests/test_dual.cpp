#include <cmath>

#include "doctest.h"
#include "vhc/calculus.hpp"
#include "vhc/dual.hpp"
#include "vhc/field.hpp"

using namespace vhc;

TEST_CASE("dual arithmetic follows the chain rule") {
  AD1 x(0.7, 1.0);
  AD1 y = sin(x) * exp(x) / (1.0 + x * x);
  const double v = 0.7;
  const double f = std::sin(v) * std::exp(v) / (1 + v * v);
  const double df = (std::cos(v) * std::exp(v) + std::sin(v) * std::exp(v)) / (1 + v * v) -
                    std::sin(v) * std::exp(v) * 2 * v / ((1 + v * v) * (1 + v * v));
  CHECK(y.v == doctest::Approx(f).epsilon(1e-15));
  CHECK(y.d == doctest::Approx(df).epsilon(1e-14));
}

TEST_CASE("elementary functions against central differences") {
  auto check = [](auto fn, double x) {
    AD1 r = fn(AD1(x, 1.0));
    const double h = 1e-6;
    const double fd = (fn(x + h) - fn(x - h)) / (2 * h);
    CHECK(r.d == doctest::Approx(fd).epsilon(1e-7));
  };
  for (double x : {0.3, 1.1, 2.5}) {
    check([](auto t) { using std::tan; return tan(t); }, x);
    check([](auto t) { using std::log; return log(t); }, x);
    check([](auto t) { using std::sqrt; return sqrt(t); }, x);
    check([](auto t) { using std::atan; return atan(t); }, x);
    check([](auto t) { using std::pow; return pow(t, 3); }, x);
    check([](auto t) { using std::pow; return pow(t, 2.5); }, x);
    check([](auto t) { using std::atan2; return atan2(t, 1.0 + t * t); }, x);
  }
}

TEST_CASE("nested duals give higher derivatives") {
  // d^k/dx^k exp(2x) = 2^k exp(2x)
  AD3 x = lift<AD3>(0.5);
  x.d.v.v = 1.0;
  x.v.d.v = 1.0;
  x.v.v.d = 1.0;
  AD3 y = exp(2.0 * x);
  const double e = std::exp(1.0);
  CHECK(y.v.v.v == doctest::Approx(e));
  CHECK(y.d.v.v == doctest::Approx(2 * e));
  CHECK(y.d.d.v == doctest::Approx(4 * e));
  CHECK(y.d.d.d == doctest::Approx(8 * e));
  CHECK(dual_depth<AD5>::value == kMaxDualDepth);
}

TEST_CASE("smooth fields evaluate at every depth; black boxes stop at one") {
  Field f = Field::smooth(2, []<class T>(std::span<const T> x) { return std::vector<T>{x[0] * x[1]}; });
  CHECK(f.scalar(std::vector<double>{2, 3}) == 6.0);
  CHECK(partial(f, std::vector<double>{2, 3}, 0) == 3.0);
  CHECK(second_partial(f, std::vector<double>{5, -1}, 0, 1) == 1.0);

  Field b = Field::black_box(2, Shape{1, 1}, [](std::span<const double> x) {
    return std::vector<double>{std::exp(x[0] * x[1])};
  });
  CHECK(b.is_black_box());
  CHECK(partial(b, std::vector<double>{1, 1}, 1) == doctest::Approx(std::exp(1.0)).epsilon(1e-8));
  std::vector<AD2> x2{lift<AD2>(1.0), lift<AD2>(1.0)};
  CHECK_THROWS_AS(b(std::span<const AD2>(x2)), DepthError);
  CHECK_THROWS_AS(f(std::vector<double>{1.0}), DimensionError);
}
