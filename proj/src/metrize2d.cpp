#include "vhc/metrize2d.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>

#include <Eigen/Dense>

#include "vhc/calculus.hpp"
#include "vhc/error.hpp"

namespace vhc {

namespace {

// Line integrals are the expensive part of f; metric checks evaluate value
// and Jacobian at the same point back to back. Remember the last point per
// thread, keyed by a process-unique id of the field.
std::uint64_t next_memo_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

template <class F>
double memo_last(std::uint64_t id, std::span<const double> x, F compute) {
  struct Last {
    std::uint64_t id = 0;
    std::vector<double> x;
    double value = 0.0;
  };
  thread_local Last last;
  if (last.id == id && std::equal(x.begin(), x.end(), last.x.begin(), last.x.end())) return last.value;
  const double v = compute();
  last = Last{id, {x.begin(), x.end()}, v};
  return v;
}

std::vector<double> default_anchor(const Chart& chart) {
  std::vector<double> a(chart.dim, 0.0);
  for (std::size_t i = 0; i < chart.dim; ++i) {
    if (chart.periodic[i]) {
      a[i] = chart.lo[i];
    } else if (std::isfinite(chart.lo[i]) && std::isfinite(chart.hi[i])) {
      a[i] = 0.5 * (chart.lo[i] + chart.hi[i]);
    }
  }
  return a;
}

// ω minimizing Σ_{jk} (∇Ric_ijk − ω_i Ric_jk)² separately for each i.
template <class T>
std::vector<T> omega_ls(const Connection& conn, const Field& ric_field, std::span<const T> x, double* resid) {
  const std::size_t n = conn.dim();
  Mat<T> ric(n, n, ric_field(x));
  Rank3<T> nabla = total_cov_derivative_02(conn, ric_field, x);
  T norm2(0.0);
  for (const T& v : ric.data()) norm2 += v * v;
  if (value_of(norm2) < 1e-20) throw SingularError("Ricci tensor vanishes; recurrence undefined");
  std::vector<T> omega(n);
  for (std::size_t i = 0; i < n; ++i) {
    T s(0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) s += nabla(i, j, k) * ric(j, k);
    omega[i] = s / norm2;
    if (resid) {
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          *resid = std::max(*resid, std::abs(value_of(nabla(i, j, k) - omega[i] * ric(j, k))));
    }
  }
  return omega;
}

double d4(const std::function<double(double)>& f, double x, double h) {
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h);
}

}  // namespace

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::positive:
      return "positive";
    case Definiteness::negative:
      return "negative";
    default:
      return "indefinite";
  }
}

Definiteness definiteness(const std::vector<Mat<double>>& samples, double tol) {
  if (samples.empty()) return Definiteness::indefinite;
  bool pos = true;
  bool neg = true;
  for (const auto& m : samples) {
    const std::size_t n = m.rows();
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e(i, j) = 0.5 * (m(i, j) + m(j, i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > tol)) pos = false;
    if (!(hi < -tol)) neg = false;
  }
  if (pos) return Definiteness::positive;
  if (neg) return Definiteness::negative;
  return Definiteness::indefinite;
}

RecurrenceData recurrence_solve(const Connection& conn, const std::vector<std::vector<double>>& grid, double tol,
                                std::vector<double> anchor) {
  if (conn.dim() != 2) throw DimensionError("recurrence_solve is two-dimensional");
  RecurrenceData rd;
  const Field ric_field = ricci_field(conn).components;
  std::vector<Mat<double>> rics;
  for (const auto& x : grid) {
    omega_ls(conn, ric_field, std::span<const double>(x), &rd.residual);
    rics.emplace_back(2, 2, ric_field(x));
  }
  rd.recurrent = rd.residual < tol;
  rd.ric_sign = definiteness(rics);
  Connection c = conn;
  rd.omega = Field::smooth(2, Shape{2, 1}, [c, ric_field]<class T>(std::span<const T> x) {
    return omega_ls(c, ric_field, x, nullptr);
  });
  rd.anchor = anchor.empty() ? default_anchor(conn.chart) : std::move(anchor);
  const Field omega = rd.omega;
  const Chart chart = conn.chart;
  const std::vector<double> a = rd.anchor;
  // ω inherits the symbols' conditioning, which degrades near coordinate
  // singularities; ask the quadrature for no more than ω can deliver.
  const double qtol = std::clamp(tol * 1e-1, 1e-10, 1e-7);
  const std::uint64_t id = next_memo_id();
  rd.f = Field::with_jacobian(
      2, Shape{1, 1},
      [omega, chart, a, qtol, id](std::span<const double> x) {
        return std::vector<double>{memo_last(id, x, [&] {
          return canonical_line_integral(omega, chart, a, {x.begin(), x.end()}, qtol);
        })};
      },
      [omega](std::span<const double> x) { return omega(x); });
  return rd;
}

double canonical_line_integral(const Field& oneform, const Chart& chart, const std::vector<double>& from,
                               const std::vector<double>& to, double tol) {
  if (from.size() != chart.dim || to.size() != chart.dim) throw DimensionError("line integral: bad endpoints");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < chart.dim; ++i)
    if (chart.periodic[i]) order.push_back(i);
  for (std::size_t i = 0; i < chart.dim; ++i)
    if (!chart.periodic[i]) order.push_back(i);
  std::vector<double> cur = from;
  double total = 0.0;
  for (std::size_t axis : order) {
    if (to[axis] == cur[axis]) continue;
    std::vector<double> p = cur;
    total += quad(
        [&](double s) {
          p[axis] = s;
          return oneform(std::span<const double>(p))[axis];
        },
        cur[axis], to[axis], tol);
    cur[axis] = to[axis];
  }
  return total;
}

ExactnessReport exactness_check(const Field& oneform, const std::vector<LoopDescriptor>& generators,
                                const std::vector<std::vector<double>>& grid, double tol) {
  if (oneform.in_dim() != 2 || oneform.out_dim() != 2) throw DimensionError("exactness_check: 2-D one-form expected");
  ExactnessReport rep;
  for (const auto& x : grid) {
    Mat<double> j = jacobian(oneform, std::span<const double>(x));
    rep.closedness_defect = std::max(rep.closedness_defect, std::abs(j(1, 0) - j(0, 1)));
  }
  rep.closed = rep.closedness_defect < tol;
  bool loops_ok = true;
  const double qtol = std::max(tol * 1e-2, 1e-11);
  for (const auto& loop : generators) {
    double total = 0.0;
    for (const Curve& c : loop.path.segments) {
      total += quad(
          [&](double t) {
            std::vector<double> p = c.position(t);
            std::vector<double> v = c.velocity(t);
            std::vector<double> w = oneform(p);
            return w[0] * v[0] + w[1] * v[1];
          },
          c.t_start, c.t_end, qtol);
    }
    rep.loop_integrals.push_back(total);
    if (std::abs(total) > tol) loops_ok = false;
  }
  rep.exact = rep.closed && loops_ok;
  return rep;
}

MetricFromRicci metric_from_ricci(const RecurrenceData& data, const Connection& conn,
                                  const std::vector<std::vector<double>>& grid, double b) {
  if (!data.recurrent) throw PreconditionError("metric_from_ricci: connection is not Ricci-recurrent");
  if (data.ric_sign == Definiteness::indefinite) throw PreconditionError("metric_from_ricci: Ricci is not definite");
  MetricFromRicci out;
  out.sign = data.ric_sign == Definiteness::positive ? 1 : -1;
  const double sign = out.sign;
  const Field ric = ricci_field(conn).components;
  const Field f = data.f;
  const Field omega = data.omega;
  out.metric = Field::with_jacobian(
      2, Shape{2, 2},
      [ric, f, sign, b](std::span<const double> x) {
        std::vector<double> r = ric(x);
        const double s = sign * std::exp(-f.scalar(x) + b);
        for (double& v : r) v *= s;
        return r;
      },
      [ric, f, omega, sign, b](std::span<const double> x) {
        std::vector<double> r = ric(x);
        Mat<double> dr = jacobian(ric, x);  // 4 x 2
        std::vector<double> w = omega(x);
        const double s = sign * std::exp(-f.scalar(x) + b);
        std::vector<double> jac(8);
        for (std::size_t c = 0; c < 4; ++c)
          for (std::size_t l = 0; l < 2; ++l) jac[c * 2 + l] = s * (dr(c, l) - w[l] * r[c]);
        return jac;
      });
  for (const auto& x : grid) {
    std::span<const double> xs(x);
    Rank3<double> cd = total_cov_derivative_02(conn, out.metric, xs);
    for (double v : cd.data) out.compatibility_defect = std::max(out.compatibility_defect, std::abs(v));
    Rank3<double> g = christoffel_from_metric(out.metric, xs);
    Rank3<double> ref = conn.at(xs);
    for (std::size_t i = 0; i < g.data.size(); ++i)
      out.christoffel_defect = std::max(out.christoffel_defect, std::abs(g.data[i] - ref.data[i]));
  }
  return out;
}

Field potential_from_oneform(const Field& mu, const Chart& chart, std::vector<double> base, double tol) {
  const std::size_t n = chart.dim;
  if (base.size() != n) throw DimensionError("potential_from_oneform: bad base point");
  // The first leg of the canonical path runs along the first periodic axis
  // through the base point whatever the target is, so tabulate it once over a
  // period and lift by periodicity.
  std::size_t axis = n;
  for (std::size_t i = 0; i < n && axis == n; ++i)
    if (chart.periodic[i]) axis = i;
  std::shared_ptr<const OdeSolution> leg;
  double period_total = 0.0;
  if (axis < n) {
    OdeOptions o;
    o.tol = std::min(tol * 1e-2, 1e-12);
    o.max_step = 0.05;
    OdeRhs rhs = [mu, base, axis](double s, std::span<const double>, std::span<double> dx) {
      std::vector<double> p = base;
      p[axis] = s;
      dx[0] = mu(std::span<const double>(p))[axis];
    };
    leg = std::make_shared<const OdeSolution>(integrate_ode(rhs, base[axis], {0.0}, base[axis] + kTwoPi, o));
    period_total = leg->final_state()[0];
  }
  auto value = [mu, chart, base, tol, axis, leg, period_total](std::span<const double> x) {
    if (!leg) return canonical_line_integral(mu, chart, base, {x.begin(), x.end()}, tol);
    const double k = std::floor((x[axis] - base[axis]) / kTwoPi);
    const double r = x[axis] - base[axis] - k * kTwoPi;
    std::vector<double> from = base;
    from[axis] = x[axis];
    return k * period_total + leg->at(base[axis] + r)[0] +
           canonical_line_integral(mu, chart, from, {x.begin(), x.end()}, tol);
  };
  return Field::with_jacobian(
      n, Shape{1, 1}, [value](std::span<const double> x) { return std::vector<double>{value(x)}; },
      [value, n](std::span<const double> x) {
        std::vector<double> jac(n);
        std::vector<double> p(x.begin(), x.end());
        for (std::size_t i = 0; i < n; ++i) {
          const double x0 = p[i];
          jac[i] = d4(
              [&](double s) {
                p[i] = s;
                return value(p);
              },
              x0, 1e-3);
          p[i] = x0;
        }
        return jac;
      });
}

double lagrangian_residual(const Field& metric, const Field& potential, const ConstrainedSystem& cs,
                           const std::vector<std::pair<std::vector<double>, std::vector<double>>>& states) {
  const std::size_t r = cs.reduced_dim();
  double worst = 0.0;
  for (const auto& [th, thd] : states) {
    std::span<const double> ts(th);
    Rank3<double> g = christoffel_from_metric(metric, ts);
    Mat<double> d(r, r, metric(ts));
    Mat<double> grad = jacobian(potential, ts);
    std::vector<double> acc_el = solve(d, grad.data());
    for (double& v : acc_el) v = -v;
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) acc_el[k] -= g(k, i, j) * thd[i] * thd[j];
    std::vector<double> acc = cs.constrained_rhs(th, thd);
    for (std::size_t k = 0; k < r; ++k) worst = std::max(worst, std::abs(acc_el[k] - acc[k]));
  }
  return worst;
}

// ---------------------------------------------------------------------------

double ClosednessProfile::residual(double a) const {
  double m = 0.0;
  for (std::size_t i = 0; i < dA.size(); ++i) m = std::max(m, std::abs(dA[i] + a * dB[i]));
  return m;
}

double ClosednessProfile::argmin(double lo, double hi) const {
  // residual(a) is convex, so ternary search converges.
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (residual(m1) < residual(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

ClosednessProfile closedness_profile(const ConstrainedSystem& cs, const CylinderIntegrals& ci, std::size_t n_theta) {
  ClosednessProfile prof;
  const Field lambda = cs.lambda_field();
  for (std::size_t j = 0; j < n_theta; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(n_theta);
    std::vector<double> x{0.0, t};
    std::vector<double> lam = lambda(x);
    Mat<double> dl = jacobian(lambda, std::span<const double>(x));
    const double dl1 = dl(0, 1);
    const double dl2 = dl(1, 1);
    const double g1 = ci.g122(t);
    const double g2 = ci.g222(t);
    const double e = std::exp(-ci.i1(t));
    const double i2 = ci.i2(t);
    prof.theta.push_back(t);
    prof.dA.push_back(dl1 + e * (g2 * i2 * lam[1] + i2 * dl2) + g1 * lam[1]);
    prof.dB.push_back(e * (g2 * lam[1] + dl2));
  }
  return prof;
}

Field cylinder_metric(const CylinderIntegrals& ci, double a, double b) {
  return Field::with_jacobian(
      2, Shape{2, 2},
      [ci, a, b](std::span<const double> x) {
        const double e = std::exp(-ci.i1(x[1]));
        const double i2 = ci.i2(x[1]);
        const double d12 = e * (i2 + a);
        return std::vector<double>{1.0, d12, d12, e * e * (i2 * i2 + 2.0 * a * i2 + b)};
      },
      [ci, a, b](std::span<const double> x) {
        const double t = x[1];
        const double e = std::exp(-ci.i1(t));
        const double i2 = ci.i2(t);
        const double g1 = ci.g122(t);
        const double g2 = ci.g222(t);
        const double d12 = g2 * e * (i2 + a) + g1;
        const double d22 = 2.0 * g2 * e * e * (i2 * i2 + 2.0 * a * i2 + b) + e * (2.0 * i2 + 2.0 * a) * g1;
        return std::vector<double>{0.0, 0.0, 0.0, d12, 0.0, d12, 0.0, d22};
      });
}

LagrangianReport cylinder_lagrangian_search(const ConstrainedSystem& cs, const CylinderSearchOptions& opts) {
  LagrangianReport rep;
  rep.method = "flat";
  const Connection conn = cs.induced_connection();
  const Chart& chart = conn.chart;
  rep.curvature = max_curvature(conn, chart.grid(9));
  if (rep.curvature > 1e-8) throw PreconditionError("cylinder search needs a flat connection");
  CylinderIntegrals ci = cylinder_integrals(conn);
  if (std::abs(ci.i1_period) > 1e-7 || std::abs(ci.i2_period) > 1e-7) {
    throw PreconditionError("cylinder search needs identity transport around the generator");
  }
  rep.metrizable = true;

  ClosednessProfile prof = closedness_profile(cs, ci, opts.n_theta);
  double best_a = opts.a_lo;
  double best_r = std::numeric_limits<double>::infinity();
  const double da = (opts.a_hi - opts.a_lo) / static_cast<double>(std::max<std::size_t>(1, opts.a_steps - 1));
  for (std::size_t i = 0; i < opts.a_steps; ++i) {
    const double a = opts.a_lo + da * static_cast<double>(i);
    const double r = prof.residual(a);
    rep.residual_curve.emplace_back(a, r);
    if (r < best_r) {
      best_r = r;
      best_a = a;
    }
  }
  rep.a = prof.argmin(std::max(opts.a_lo, best_a - da), std::min(opts.a_hi, best_a + da));
  rep.closedness_residual = prof.residual(rep.a);
  rep.b = opts.b;
  if (rep.b <= rep.a * rep.a) {
    rep.b = rep.a * rep.a + 1.0;
    rep.note = "b raised to a^2 + 1 to keep the metric positive definite; ";
  }
  rep.metric = cylinder_metric(ci, rep.a, rep.b);
  if (rep.closedness_residual > opts.tol) {
    rep.note += "no a in the swept range makes D_C lambda closed";
    return rep;
  }

  const Field metric = rep.metric;
  const Field lambda = cs.lambda_field();
  Field mu = Field::black_box(2, Shape{2, 1}, [metric, lambda](std::span<const double> x) {
    Mat<double> d(2, 2, metric(x));
    return d * lambda(x);
  });
  std::vector<LoopDescriptor> gens{LoopDescriptor::generator({0.0, 0.0}, 1, "cylinder-S1 generator")};
  ExactnessReport ex = exactness_check(mu, gens, chart.grid(7), 1e-6);
  rep.loop_integrals = ex.loop_integrals;
  if (!ex.exact) {
    rep.note += "D_C lambda is closed but not exact";
    return rep;
  }
  rep.potential = potential_from_oneform(mu, chart, {0.0, 0.0});
  rep.potential_exists = true;
  rep.lagrangian = true;
  return rep;
}

LagrangianReport ricci_lagrangian(const ConstrainedSystem& cs, const std::vector<LoopDescriptor>& generators,
                                  const std::vector<std::vector<double>>& grid, double tol) {
  LagrangianReport rep;
  rep.method = "ricci-recurrence";
  const Connection conn = cs.induced_connection();
  RecurrenceData rd = recurrence_solve(conn, grid, tol);
  rep.recurrence_residual = rd.residual;
  rep.ric_sign = rd.ric_sign;
  if (!rd.recurrent) {
    rep.note = "Ricci tensor is not recurrent";
    return rep;
  }
  if (rd.ric_sign == Definiteness::indefinite) {
    rep.note = "Ricci tensor is not definite";
    return rep;
  }
  ExactnessReport ex = exactness_check(rd.omega, generators, grid, 1e-6);
  rep.loop_integrals = ex.loop_integrals;
  if (!ex.exact) {
    rep.note = "recurrence one-form is not exact (closedness defect " + std::to_string(ex.closedness_defect) + ")";
    return rep;
  }
  MetricFromRicci m = metric_from_ricci(rd, conn, {grid.front()});
  rep.metric = m.metric;
  rep.metrizable = true;

  const Field lambda = cs.lambda_field();
  double lam_max = 0.0;
  for (const auto& x : grid) lam_max = std::max(lam_max, max_abs(lambda(x)));
  if (lam_max == 0.0) {
    rep.closedness_residual = 0.0;
    rep.potential = Field::smooth(2, []<class T>(std::span<const T>) { return std::vector<T>{T(0.0)}; });
    rep.potential_exists = true;
    rep.lagrangian = true;
    return rep;
  }
  const Field metric = rep.metric;
  Field mu = Field::black_box(2, Shape{2, 1}, [metric, lambda](std::span<const double> x) {
    Mat<double> d(2, 2, metric(x));
    return d * lambda(x);
  });
  ExactnessReport pex = exactness_check(mu, generators, grid, 1e-6);
  rep.closedness_residual = pex.closedness_defect;
  if (!pex.exact) {
    rep.note = "D_C lambda is not exact; no potential";
    return rep;
  }
  rep.potential = potential_from_oneform(mu, conn.chart, rd.anchor);
  rep.potential_exists = true;
  rep.lagrangian = true;
  return rep;
}

}  // namespace vhc
