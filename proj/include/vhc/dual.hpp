#pragma once

// Forward-mode dual numbers with a single tangent direction. Higher-order
// derivatives come from nesting: Dual<Dual<double>> carries mixed second
// derivatives, and so on up to the depth used by Field.

#include <cmath>
#include <ostream>
#include <type_traits>

namespace vhc {

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // tangent

  constexpr Dual() = default;
  constexpr Dual(double x) : v(x), d(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T value, T tangent) : v(value), d(tangent) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
};

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};
template <class T> inline constexpr bool is_dual_v = is_dual<T>::value;

/// Innermost value of a possibly nested dual.
inline double value_of(double x) { return x; }
template <class T> double value_of(const Dual<T>& x) { return value_of(x.v); }

/// Nesting depth: 0 for double, 1 for Dual<double>, ...
template <class T> struct dual_depth : std::integral_constant<int, 0> {};
template <class T> struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};

/// Lift a scalar of type T into type U (U is T or a dual nested over T).
template <class U, class T>
U lift(const T& x) {
  if constexpr (std::is_same_v<U, T>) {
    return x;
  } else {
    using Inner = decltype(U{}.v);
    return U{lift<Inner>(x), Inner{}};
  }
}

// Arithmetic. Mixed double/Dual overloads keep model code free of casts.
template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}
template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T> Dual<T> operator/(double a, const Dual<T>& b) { return Dual<T>(a) / b; }

// Comparisons look at the innermost value only.
template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return value_of(a) < value_of(b); }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return value_of(a) > value_of(b); }
template <class T> bool operator<(const Dual<T>& a, double b) { return value_of(a) < b; }
template <class T> bool operator>(const Dual<T>& a, double b) { return value_of(a) > b; }
template <class T> bool operator<(double a, const Dual<T>& b) { return a < value_of(b); }
template <class T> bool operator>(double a, const Dual<T>& b) { return a > value_of(b); }

// Elementary functions. Each applies the chain rule once; nesting recurses.
using std::atan;
using std::atan2;
using std::atanh;
using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;
using std::tan;
using std::abs;

template <class T> Dual<T> sin(const Dual<T>& a) { return {sin(a.v), a.d * cos(a.v)}; }
template <class T> Dual<T> cos(const Dual<T>& a) { return {cos(a.v), -(a.d * sin(a.v))}; }
template <class T> Dual<T> tan(const Dual<T>& a) {
  T t = tan(a.v);
  return {t, a.d * (1.0 + t * t)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, a.d * e};
}
template <class T> Dual<T> log(const Dual<T>& a) { return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T> Dual<T> atan(const Dual<T>& a) { return {atan(a.v), a.d / (1.0 + a.v * a.v)}; }
template <class T> Dual<T> atanh(const Dual<T>& a) { return {atanh(a.v), a.d / (1.0 - a.v * a.v)}; }
template <class T> Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
  T r2 = x.v * x.v + y.v * y.v;
  return {atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / r2};
}
template <class T> Dual<T> abs(const Dual<T>& a) { return value_of(a) < 0.0 ? -a : a; }
/// Integer powers by repeated multiplication; exact for nested duals.
template <class T> Dual<T> pow(const Dual<T>& a, int n) {
  if (n < 0) return 1.0 / pow(a, -n);
  Dual<T> r(1.0);
  for (int k = 0; k < n; ++k) r *= a;
  return r;
}
template <class T> Dual<T> pow(const Dual<T>& a, double p) {
  T base = pow(a.v, p);
  return {base, a.d * p * pow(a.v, p - 1.0)};
}
inline double pow(double a, int n) { return std::pow(a, n); }

template <class T>
std::ostream& operator<<(std::ostream& os, const Dual<T>& a) {
  return os << '(' << a.v << " + " << a.d << "e)";
}

// Supported nesting levels for type-erased fields.
using AD1 = Dual<double>;
using AD2 = Dual<AD1>;
using AD3 = Dual<AD2>;
using AD4 = Dual<AD3>;
using AD5 = Dual<AD4>;

inline constexpr int kMaxDualDepth = 5;

}  // namespace vhc
