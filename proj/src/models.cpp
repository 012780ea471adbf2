#include "vhc/models.hpp"

#include <numbers>

#include "vhc/error.hpp"

namespace vhc {

namespace {

Field zero_scalar(std::size_t n) {
  return Field::smooth(n, []<class T>(std::span<const T>) { return std::vector<T>{T(0.0)}; });
}

Field zero_vector(std::size_t n) {
  return Field::smooth(n, Shape{n, 1}, [n]<class T>(std::span<const T>) { return std::vector<T>(n, T(0.0)); });
}

Field identity_inertia(std::size_t n) {
  return Field::smooth(n, Shape{n, n}, [n]<class T>(std::span<const T>) {
    std::vector<T> d(n * n, T(0.0));
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = T(1.0);
    return d;
  });
}

Field unit_sphere_constraint(std::size_t n) {
  return Field::smooth(n, []<class T>(std::span<const T> q) {
    T s(-1.0);
    for (const T& v : q) s += v * v;
    return std::vector<T>{s};
  });
}

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

ModelBundle circle_particle(double alpha) {
  if (!(std::abs(alpha) < std::numbers::pi / 2)) throw DomainError("circle_particle: alpha must lie in (-pi/2, pi/2)");
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  ModelBundle m;
  m.name = "circle";
  m.params = {{"alpha", alpha}};
  m.system.chart = Chart::euclidean(2);
  m.system.inertia = identity_inertia(2);
  m.system.potential = zero_scalar(2);
  m.system.grad_potential = zero_vector(2);
  m.system.input = Field::smooth(2, Shape{2, 1}, [ca, sa]<class T>(std::span<const T> q) {
    return std::vector<T>{ca * q[0] - sa * q[1], sa * q[0] + ca * q[1]};
  });
  // (R_{α+π/2} q)ᵀ, which is orthogonal to R_α q.
  m.system.annihilator = Field::smooth(2, Shape{1, 2}, [ca, sa]<class T>(std::span<const T> q) {
    return std::vector<T>{-sa * q[0] - ca * q[1], ca * q[0] - sa * q[1]};
  });
  m.system.constraint = unit_sphere_constraint(2);
  m.parametrization.reduced = Chart::cylinder({true});
  m.parametrization.phi = Field::smooth(1, Shape{2, 1}, []<class T>(std::span<const T> th) {
    using std::cos;
    using std::sin;
    return std::vector<T>{cos(th[0]), sin(th[0])};
  });
  m.generators = {LoopDescriptor::generator({0.0}, 0, "circle-S1 generator")};
  m.expected = {{"Gamma111", std::tan(alpha)}, {"Psi2", -std::tan(alpha)}};
  m.grid_points = 32;
  m.grid_margin = 0.0;
  return m;
}

ModelBundle sphere_mass() {
  ModelBundle m;
  m.name = "sphere";
  m.system.chart = Chart::euclidean(3);
  m.system.inertia = identity_inertia(3);
  m.system.potential = zero_scalar(3);
  m.system.grad_potential = zero_vector(3);
  m.system.input = Field::smooth(3, Shape{3, 1}, []<class T>(std::span<const T> q) {
    return std::vector<T>{q[0], q[1], 2.0 * q[2]};
  });
  m.system.annihilator = Field::smooth(3, Shape{2, 3}, []<class T>(std::span<const T> q) {
    return std::vector<T>{-q[1], q[0], T(0.0), -q[0] * q[2], -q[1] * q[2], 0.5 * (q[0] * q[0] + q[1] * q[1])};
  });
  m.system.constraint = unit_sphere_constraint(3);
  // Colatitude on (0, π), longitude periodic.
  m.parametrization.reduced = Chart::box({0.0, -std::numbers::pi}, {std::numbers::pi, std::numbers::pi});
  m.parametrization.reduced.periodic[1] = true;
  m.parametrization.phi = Field::smooth(2, Shape{3, 1}, []<class T>(std::span<const T> th) {
    using std::cos;
    using std::sin;
    return std::vector<T>{sin(th[0]) * cos(th[1]), sin(th[0]) * sin(th[1]), cos(th[0])};
  });
  m.generators = {LoopDescriptor::generator({std::numbers::pi / 2, -std::numbers::pi}, 1, "sphere-longitude")};
  m.expected = {{"Gamma212_at_pi_over_4", 1.0}};
  m.grid_points = 9;
  m.grid_margin = 1e-2;
  return m;
}

ModelBundle double_pendulum_cart(DpcCase which, double gravity) {
  if (!(gravity > 0.0)) throw DomainError("double_pendulum_cart: G must be positive");
  const bool cart = which == DpcCase::force_on_cart;
  ModelBundle m;
  m.name = cart ? "dpc-a" : "dpc-b";
  m.params = {{"G", gravity}};
  m.system.chart = Chart::cylinder({false, true, true});
  m.system.inertia = Field::smooth(3, Shape{3, 3}, []<class T>(std::span<const T> q) {
    using std::cos;
    const T c2 = cos(q[1]);
    const T c3 = cos(q[2]);
    const T c23 = cos(q[1] - q[2]);
    return std::vector<T>{T(3.0), -2.0 * c2, -c3, -2.0 * c2, T(2.0), c23, -c3, c23, T(1.0)};
  });
  const double g = gravity;
  m.system.potential = Field::smooth(3, [g]<class T>(std::span<const T> q) {
    using std::cos;
    return std::vector<T>{(2.0 * cos(q[1]) + cos(q[2])) * g};
  });
  m.system.grad_potential = Field::smooth(3, Shape{3, 1}, [g]<class T>(std::span<const T> q) {
    using std::sin;
    return std::vector<T>{T(0.0), -2.0 * g * sin(q[1]), -g * sin(q[2])};
  });
  m.system.input = Field::smooth(3, Shape{3, 1}, [cart]<class T>(std::span<const T>) {
    return cart ? std::vector<T>{T(1.0), T(0.0), T(0.0)} : std::vector<T>{T(0.0), T(0.0), T(1.0)};
  });
  m.system.annihilator = Field::smooth(3, Shape{2, 3}, [cart]<class T>(std::span<const T>) {
    if (cart) return std::vector<T>{T(0.0), T(1.0), T(0.0), T(0.0), T(0.0), T(1.0)};
    return std::vector<T>{T(1.0), T(0.0), T(0.0), T(0.0), T(1.0), T(0.0)};
  });
  m.system.constraint = Field::smooth(3, []<class T>(std::span<const T> q) {
    return std::vector<T>{q[2] - dpc_rho(q[1])};
  });
  m.parametrization.reduced = Chart::cylinder({false, true});
  m.parametrization.phi = Field::smooth(2, Shape{3, 1}, []<class T>(std::span<const T> th) {
    return std::vector<T>{th[0], th[1], dpc_rho(th[1])};
  });
  m.generators = {LoopDescriptor::generator({0.0, 0.0}, 1, "cylinder-S1 generator")};
  m.expected = {{"a_target", -0.5}, {"case_a_floor", 1.0}};
  m.grid_points = 9;
  m.grid_margin = 0.0;
  return m;
}

ModelBundle make_model(const std::string& name, const std::map<std::string, double>& params) {
  auto check = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw DomainError("model '" + name + "' has no parameter '" + k + "'");
    }
  };
  if (name == "circle") {
    check({"alpha"});
    return circle_particle(param(params, "alpha", 0.0));
  }
  if (name == "sphere") {
    check({});
    return sphere_mass();
  }
  if (name == "dpc-a" || name == "dpc-b") {
    check({"G"});
    return double_pendulum_cart(name == "dpc-a" ? DpcCase::force_on_cart : DpcCase::torque_on_last_joint,
                                param(params, "G", 9.81));
  }
  throw DomainError("unknown model '" + name + "'");
}

std::vector<std::string> model_names() { return {"circle", "sphere", "dpc-a", "dpc-b"}; }

}  // namespace vhc
