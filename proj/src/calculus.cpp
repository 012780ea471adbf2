#include "vhc/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vhc/error.hpp"

namespace vhc {

namespace {

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite coordinate");
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite evaluation");
  return v;
}

}  // namespace

double partial(const Field& f, std::span<const double> x, std::size_t i) {
  if (i >= x.size()) throw DimensionError("partial: index out of range");
  require_finite(x, "partial");
  std::vector<AD1> xd(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) xd[k] = AD1(x[k], k == i ? 1.0 : 0.0);
  std::vector<AD1> y = f(std::span<const AD1>(xd));
  checked(y.front().v, "partial");
  return checked(y.front().d, "partial");
}

double partial(const Field& f, const Chart& chart, std::span<const double> x, std::size_t i) {
  if (!chart.contains(x)) throw DomainError("partial: point outside the chart domain");
  return partial(f, x, i);
}

double second_partial(const Field& f, std::span<const double> x, std::size_t i, std::size_t j) {
  if (i >= x.size() || j >= x.size()) throw DimensionError("second_partial: index out of range");
  require_finite(x, "second_partial");
  if (f.depth() >= 2) return checked(hessian(f, x)(i, j), "second_partial");

  // Nested central differences for black-box fields.
  std::vector<double> p(x.begin(), x.end());
  const double hi = 1e-4 * std::max(1.0, std::abs(x[i]));
  const double hj = 1e-4 * std::max(1.0, std::abs(x[j]));
  auto eval = [&](double di, double dj) {
    p[i] += di;
    p[j] += dj;
    double v = f.scalar(p);
    p[i] -= di;
    p[j] -= dj;
    return checked(v, "second_partial");
  };
  if (i == j) {
    return (eval(hi, 0.0) - 2.0 * eval(0.0, 0.0) + eval(-hi, 0.0)) / (hi * hi);
  }
  return (eval(hi, hj) - eval(hi, -hj) - eval(-hi, hj) + eval(-hi, -hj)) / (4.0 * hi * hj);
}

double quad(const std::function<double(double)>& f, double a, double b, const QuadOptions& opts) {
  using boost::math::quadrature::gauss_kronrod;
  if (a == b) return 0.0;
  if (a > b) return -quad(f, b, a, opts);
  auto g = [&f](double t) {
    double v = f(t);
    if (!std::isfinite(v)) throw DomainError("quad: non-finite integrand");
    return v;
  };
  // Global adaptive bisection of the worst panel. Boost's own recursion
  // scales its threshold by the integral value and never stops on integrands
  // that integrate to ~0, so only its single-panel rule is used here.
  struct Panel {
    double lo, hi, value, err, l1;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  auto panel = [&](double lo, double hi) {
    Panel p{lo, hi, 0.0, 0.0, 0.0};
    p.value = gauss_kronrod<double, 15>::integrate(g, lo, hi, 0, 0.0, &p.err, &p.l1);
    return p;
  };
  std::priority_queue<Panel> heap;
  heap.push(panel(a, b));
  double total = heap.top().value;
  double err = heap.top().err;
  double l1 = heap.top().l1;
  const std::size_t budget = std::size_t{1} << opts.max_depth;
  for (std::size_t n = 1; n < budget; ++n) {
    if (err <= std::max(opts.tol, opts.rel_floor * l1)) return total;
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    Panel left = panel(worst.lo, mid);
    Panel right = panel(mid, worst.hi);
    total += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  // Running sums drift; recompute before the final verdict.
  total = err = l1 = 0.0;
  for (; !heap.empty(); heap.pop()) {
    total += heap.top().value;
    err += heap.top().err;
    l1 += heap.top().l1;
  }
  if (!(err <= std::max(opts.tol, opts.rel_floor * l1))) {
    std::ostringstream msg;
    msg << "quad: error estimate " << err << " above tolerance " << opts.tol << " after max refinement";
    throw IntegrationError(msg.str());
  }
  return total;
}

// ---------------------------------------------------------------------------

std::vector<double> OdeSolution::at(double t) const {
  const double lo = std::min(t_start(), t_end());
  const double hi = std::max(t_start(), t_end());
  const double slack = 1e-12 * std::max(1.0, hi - lo);
  if (t < lo - slack || t > hi + slack) throw DomainError("OdeSolution::at: time outside the integrated span");
  if (steps_.empty()) return states_.front();

  const bool forward = t_end() >= t_start();
  // Steps are stored in integration order; times_ is monotone.
  std::size_t k;
  if (forward) {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  } else {
    auto it = std::upper_bound(times_.begin(), times_.end(), t, std::greater<double>());
    k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  }
  k = std::min(k, steps_.size() - 1);
  const Step& s = steps_[k];
  const double th = (t - s.t0) / s.h;
  const double th1 = 1.0 - th;
  std::vector<double> y(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    y[i] = s.c[0][i] + th * (s.c[1][i] + th1 * (s.c[2][i] + th * (s.c[3][i] + th1 * s.c[4][i])));
  }
  return y;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

OdeSolution integrate_ode(const OdeRhs& rhs, double t0, std::vector<double> x0, double t1, const OdeOptions& opts) {
  const std::size_t n = x0.size();
  OdeSolution sol;
  sol.dim_ = n;
  sol.times_.push_back(t0);
  sol.states_.push_back(x0);
  if (!all_finite(x0)) throw IntegrationError("integrate_ode: non-finite initial state");
  if (t1 == t0) return sol;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  auto f = [&](double t, const std::vector<double>& x, std::vector<double>& dx) {
    rhs(t, std::span<const double>(x), std::span<double>(dx));
  };

  std::vector<double> y = std::move(x0);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  double t = t0;
  f(t, y, k1);
  if (!all_finite(k1)) throw IntegrationError("integrate_ode: non-finite derivative at the initial state");

  auto accept = [&](double h, const std::vector<double>& y1, const std::vector<double>& f0,
                    const std::vector<double>& f1, const std::vector<double>* corr) {
    OdeSolution::Step s;
    s.t0 = t;
    s.h = h;
    for (auto& c : s.c) c.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double ydiff = y1[i] - y[i];
      double bspl = h * f0[i] - ydiff;
      s.c[0][i] = y[i];
      s.c[1][i] = ydiff;
      s.c[2][i] = bspl;
      s.c[3][i] = ydiff - h * f1[i] - bspl;
      if (corr) s.c[4][i] = (*corr)[i];
    }
    sol.steps_.push_back(std::move(s));
    const double tn = t + h;
    if (sol.steps_.size() >= opts.max_steps) throw IntegrationError("integrate_ode: step budget exhausted");
    sol.times_.push_back(tn);
    sol.states_.push_back(y1);
    if (opts.guard && !opts.guard(tn, std::span<const double>(y1))) {
      throw IntegrationError("integrate_ode: state left the guard region at t = " + std::to_string(tn));
    }
  };

  if (opts.method == OdeMethod::rk4) {
    if (!(opts.step > 0.0)) throw IntegrationError("integrate_ode: rk4 needs a positive step");
    const auto nsteps = static_cast<std::size_t>(std::ceil(span / opts.step - 1e-9));
    const double h = dir * span / static_cast<double>(nsteps);
    for (std::size_t s = 0; s < nsteps; ++s) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      f(t + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      f(t + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
      f(t + h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i) ynew[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      const double tnext = (s + 1 == nsteps) ? t1 : t + h;
      f(tnext, ynew, k7);
      if (!all_finite(ynew) || !all_finite(k7)) {
        throw IntegrationError("integrate_ode: non-finite state at t = " + std::to_string(tnext));
      }
      accept(tnext - t, ynew, k1, k7, nullptr);
      t = tnext;
      y = ynew;
      k1 = k7;
    }
    return sol;
  }

  // Adaptive Dormand-Prince.
  const double atol = opts.tol;
  const double rtol = opts.tol;
  double h = opts.step > 0.0 ? opts.step : 0.0;
  if (h == 0.0) {
    double ny = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sk = atol + rtol * std::abs(y[i]);
      ny += (y[i] / sk) * (y[i] / sk);
      nf += (k1[i] / sk) * (k1[i] / sk);
    }
    ny = std::sqrt(ny / std::max<std::size_t>(n, 1));
    nf = std::sqrt(nf / std::max<std::size_t>(n, 1));
    h = (ny < 1e-5 || nf < 1e-5) ? 1e-6 : 0.01 * ny / nf;
  }
  h = std::min({h, opts.max_step, span});
  double err_prev = 1e-4;
  std::vector<double> corr(n);

  while (dir * (t1 - t) > 0.0) {
    if (h < opts.min_step) {
      throw IntegrationError("integrate_ode: step size underflow at t = " + std::to_string(t));
    }
    bool last = false;
    if (h >= std::abs(t1 - t) * (1.0 - 1e-12)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    f(t + c2 * hs, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * hs, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * hs, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * hs, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double tnext = last ? t1 : t + hs;
    f(tnext, tmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(tnext, ynew, k7);

    double err = 0.0;
    bool finite = all_finite(ynew) && all_finite(k7);
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) {
        double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err += (e / sk) * (e / sk);
      }
      err = std::sqrt(err / std::max<std::size_t>(n, 1));
      finite = std::isfinite(err);
    }
    if (!finite) {
      h *= 0.25;
      continue;
    }
    if (err <= 1.0) {
      for (std::size_t i = 0; i < n; ++i)
        corr[i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      accept(tnext - t, ynew, k1, k7, &corr);
      t = tnext;
      y = ynew;
      k1 = k7;
      // PI step-size control (Hairer's constants).
      double fac = 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      if (err == 0.0) fac = 5.0;
      fac = std::clamp(fac, 0.2, 5.0);
      err_prev = std::max(err, 1e-4);
      h = std::min(h * fac, opts.max_step);
      if (last) break;
    } else {
      double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
      h *= fac;
    }
  }
  return sol;
}

}  // namespace vhc
