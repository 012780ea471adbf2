#include "vhc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <thread>

#include "vhc/error.hpp"

namespace vhc {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<std::string> state_labels(const std::string& sym, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sym + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) out.push_back(sym + "dot" + std::to_string(i + 1));
  return out;
}

// Bounded non-periodic coordinates must stay strictly inside the box.
OdeGuard chart_guard(const Chart& chart, OdeGuard user) {
  return [chart, user](double t, std::span<const double> x) {
    for (std::size_t i = 0; i < chart.dim; ++i) {
      if (chart.periodic[i]) continue;
      if (!(x[i] > chart.lo[i] && x[i] < chart.hi[i])) return false;
    }
    return !user || user(t, x);
  };
}

void sample(const OdeSolution& sol, double t1, std::size_t samples, Trajectory& out) {
  if (samples == 0) {
    out.t = sol.times();
    out.states = sol.states();
    return;
  }
  if (samples < 2) throw DomainError("simulation needs at least two output samples");
  for (std::size_t i = 0; i < samples; ++i) {
    // Hit t1 exactly on the last sample.
    const double t = i + 1 == samples ? t1 : t1 * static_cast<double>(i) / static_cast<double>(samples - 1);
    out.t.push_back(t);
    out.states.push_back(i + 1 == samples ? sol.final_state() : sol.at(t));
  }
}

double constraint_residual(const Field& h, std::span<const double> q, std::span<const double> qdot) {
  std::vector<double> hv = h(q);
  Mat<double> dh = jacobian(h, q);
  std::vector<double> qd(qdot.begin(), qdot.end());
  std::vector<double> hd = dh * qd;
  return norm(hv) + norm(hd);
}

void check_horizon(double t1) {
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw DomainError("simulation horizon must be positive and finite");
}

}  // namespace

double Trajectory::max_residual() const {
  double m = 0.0;
  for (double r : residual) m = std::max(m, r);
  return m;
}

double Trajectory::energy_drift() const {
  if (energy.empty()) return std::numeric_limits<double>::quiet_NaN();
  double worst = 0.0;
  for (double e : energy) worst = std::max(worst, std::abs(e - energy.front()));
  const double scale = std::max(std::abs(energy.front()), kinetic_scale);
  return scale > 0.0 ? worst / scale : worst;
}

Trajectory simulate_constrained(const ModelBundle& bundle, std::span<const double> theta0,
                                std::span<const double> theta_dot0, double t1, const SimOptions& opts,
                                const LagrangianReport* structure) {
  check_horizon(t1);
  const ConstrainedSystem cs = bundle.constrained();
  const std::size_t n = cs.reduced_dim();
  if (theta0.size() != n || theta_dot0.size() != n)
    throw DimensionError("simulate_constrained: initial condition must have " + std::to_string(n) + " + " +
                         std::to_string(n) + " components");
  if (!cs.parametrization().reduced.contains(theta0))
    throw DomainError("simulate_constrained: initial position lies outside the reduced chart");
  std::vector<double> x0(theta0.begin(), theta0.end());
  x0.insert(x0.end(), theta_dot0.begin(), theta_dot0.end());

  OdeRhs rhs = [&cs, n](double, std::span<const double> x, std::span<double> dx) {
    std::vector<double> acc = cs.constrained_rhs(x.subspan(0, n), x.subspan(n, n));
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] = x[n + i];
      dx[n + i] = acc[i];
    }
  };
  OdeOptions ode = opts.ode;
  ode.guard = chart_guard(bundle.parametrization.reduced, opts.ode.guard);
  OdeSolution sol = integrate_ode(rhs, 0.0, x0, t1, ode);

  Trajectory out;
  out.dim = n;
  out.labels = state_labels("theta", n);
  sample(sol, t1, opts.samples, out);

  const auto& h = bundle.system.constraint;
  const bool with_energy = structure && structure->lagrangian && !structure->metric.empty() &&
                           !structure->potential.empty();
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto th = out.position(i);
    auto thd = out.velocity(i);
    if (h) {
      auto [q, qd] = lift_state(bundle, th, thd);
      out.residual.push_back(constraint_residual(*h, q, qd));
    } else {
      out.residual.push_back(0.0);
    }
    if (with_energy) {
      Mat<double> d(n, n, structure->metric(th));
      double kin = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) kin += 0.5 * thd[a] * d(a, b) * thd[b];
      out.kinetic_scale = std::max(out.kinetic_scale, std::abs(kin));
      out.energy.push_back(kin + structure->potential.scalar(th));
    }
  }
  return out;
}

Trajectory simulate_full(const ModelBundle& bundle, std::span<const double> q0, std::span<const double> qdot0,
                         Gains gains, double t1, const SimOptions& opts, const Feedback& feedback) {
  check_horizon(t1);
  const ConstrainedSystem cs = bundle.constrained();
  const std::size_t n = cs.ambient_dim();
  if (q0.size() != n || qdot0.size() != n)
    throw DimensionError("simulate_full: initial condition must have " + std::to_string(n) + " + " +
                         std::to_string(n) + " components");
  if (!feedback && !bundle.system.constraint) throw PreconditionError("simulate_full: model has no constraint h");
  std::vector<double> x0(q0.begin(), q0.end());
  x0.insert(x0.end(), qdot0.begin(), qdot0.end());

  OdeRhs rhs = [&](double, std::span<const double> x, std::span<double> dx) {
    auto q = x.subspan(0, n);
    auto qd = x.subspan(n, n);
    std::vector<double> tau = feedback ? feedback(q, qd) : cs.stabilizing_feedback(q, qd, gains.kp, gains.kd);
    std::vector<double> acc = cs.full_acceleration(q, qd, tau);
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] = qd[i];
      dx[n + i] = acc[i];
    }
  };
  OdeOptions ode = opts.ode;
  ode.guard = chart_guard(bundle.system.chart, opts.ode.guard);
  OdeSolution sol = integrate_ode(rhs, 0.0, x0, t1, ode);

  Trajectory out;
  out.dim = n;
  out.labels = state_labels("q", n);
  sample(sol, t1, opts.samples, out);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.residual.push_back(bundle.system.constraint
                               ? constraint_residual(*bundle.system.constraint, out.position(i), out.velocity(i))
                               : 0.0);
  return out;
}

std::pair<std::vector<double>, std::vector<double>> lift_state(const ModelBundle& bundle,
                                                               std::span<const double> theta,
                                                               std::span<const double> theta_dot) {
  const auto& par = bundle.parametrization;
  if (theta.size() != par.dim() || theta_dot.size() != par.dim())
    throw DimensionError("lift_state: reduced state has the wrong size");
  std::vector<double> q = par.phi(theta);
  std::vector<double> td(theta_dot.begin(), theta_dot.end());
  std::vector<double> qd = par.dphi(theta) * td;
  return {q, qd};
}

const char* to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::stationary:
      return "stationary";
    case OrbitClass::rocking:
      return "rocking";
    default:
      return "rotating";
  }
}

OrbitClass classify_orbit(const Trajectory& traj, std::size_t axis, double still_tol) {
  if (axis >= traj.dim) throw DimensionError("classify_orbit: axis out of range");
  if (traj.size() == 0) return OrbitClass::stationary;
  double lo = traj.states[0][axis];
  double hi = lo;
  double speed = 0.0;
  for (const auto& s : traj.states) {
    lo = std::min(lo, s[axis]);
    hi = std::max(hi, s[axis]);
    speed = std::max(speed, std::abs(s[traj.dim + axis]));
  }
  if (hi - lo > kTwoPi) return OrbitClass::rotating;
  if (hi - lo < still_tol && speed < still_tol) return OrbitClass::stationary;
  return OrbitClass::rocking;
}

std::size_t default_portrait_axis(const ModelBundle& bundle) {
  const Chart& c = bundle.parametrization.reduced;
  for (std::size_t i = c.dim; i-- > 0;)
    if (c.periodic[i]) return i;
  return c.dim - 1;
}

std::vector<InitialCondition> default_portrait_ics(const ModelBundle& bundle) {
  const std::size_t n = bundle.parametrization.dim();
  const std::size_t axis = default_portrait_axis(bundle);
  std::vector<InitialCondition> out;
  for (double v : {1.0, 4.0, 8.0, 16.0, 24.0}) {
    InitialCondition ic{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    ic.theta[axis] = std::numbers::pi;
    ic.theta_dot[axis] = v;
    // Off-axis coordinates sit at their box centre when bounded.
    const Chart& c = bundle.parametrization.reduced;
    for (std::size_t i = 0; i < n; ++i)
      if (i != axis && !c.periodic[i] && std::isfinite(c.lo[i]) && std::isfinite(c.hi[i]))
        ic.theta[i] = 0.5 * (c.lo[i] + c.hi[i]);
    out.push_back(std::move(ic));
  }
  return out;
}

std::vector<Orbit> phase_portrait(const ModelBundle& bundle, const std::vector<InitialCondition>& ics, double t1,
                                  const PortraitOptions& opts, const LagrangianReport* structure) {
  const std::size_t axis = opts.axis.value_or(default_portrait_axis(bundle));
  if (axis >= bundle.parametrization.dim()) throw DimensionError("phase_portrait: axis out of range");
  std::vector<Orbit> out(ics.size());
  std::vector<std::exception_ptr> errors(ics.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < ics.size(); i = next++) {
      try {
        Orbit& o = out[i];
        o.ic = ics[i];
        o.traj = simulate_constrained(bundle, ics[i].theta, ics[i].theta_dot, t1, opts.sim, structure);
        o.cls = classify_orbit(o.traj, axis);
        double lo = o.traj.states[0][axis];
        double hi = lo;
        for (const auto& s : o.traj.states) {
          lo = std::min(lo, s[axis]);
          hi = std::max(hi, s[axis]);
        }
        o.lift_range = hi - lo;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(ics.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (const auto& l : traj.labels) os << ',' << l;
  os << ",residual,energy\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << format_number(traj.t[i]);
    for (double v : traj.states[i]) os << ',' << format_number(v);
    os << ',' << format_number(i < traj.residual.size() ? traj.residual[i] : 0.0);
    os << ',' << (traj.has_energy() ? format_number(traj.energy[i]) : std::string("nan")) << '\n';
  }
}

void write_portrait_csv(std::ostream& os, const std::vector<Orbit>& orbits, std::size_t axis) {
  os << "run,class,t,theta,theta_dot\n";
  for (std::size_t r = 0; r < orbits.size(); ++r) {
    const Trajectory& tr = orbits[r].traj;
    if (axis >= tr.dim) throw DimensionError("write_portrait_csv: axis out of range");
    for (std::size_t i = 0; i < tr.size(); ++i)
      os << r << ',' << to_string(orbits[r].cls) << ',' << format_number(tr.t[i]) << ','
         << format_number(tr.states[i][axis]) << ',' << format_number(tr.states[i][tr.dim + axis]) << '\n';
  }
}

}  // namespace vhc
