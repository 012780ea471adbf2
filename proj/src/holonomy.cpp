#include "vhc/holonomy.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "vhc/calculus.hpp"
#include "vhc/error.hpp"

namespace vhc {

namespace {

// Integrates the n x k matrix ODE Ẋ = −Γ(γ̇) X along one curve, splitting
// at breakpoints so no step straddles a kink.
Mat<double> transport_block(const Connection& conn, const Curve& curve, const Mat<double>& x0, double tol) {
  const std::size_t n = conn.dim();
  const std::size_t k = x0.cols();
  if (x0.rows() != n) throw DimensionError("parallel_transport: vector has wrong size");
  std::vector<double> cuts{curve.t_start};
  for (double b : curve.breakpoints)
    if (b > curve.t_start && b < curve.t_end) cuts.push_back(b);
  cuts.push_back(curve.t_end);

  OdeRhs rhs = [&](double t, std::span<const double> x, std::span<double> dx) {
    std::vector<double> p = conn.chart.wrap(curve.position(t));
    std::vector<double> v = curve.velocity(t);
    Rank3<double> g = conn.at(p);
    for (std::size_t row = 0; row < n; ++row) {
      for (std::size_t col = 0; col < k; ++col) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (v[i] == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) s += v[i] * g(row, i, j) * x[j * k + col];
        }
        dx[row * k + col] = -s;
      }
    }
  };
  OdeOptions opts;
  opts.tol = tol;
  opts.step = 0.0;
  std::vector<double> state = x0.data();
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    if (cuts[s + 1] == cuts[s]) continue;
    // Nudge off the breakpoint itself, where velocity is one-sided.
    const double eps = 1e-12 * std::max(1.0, std::abs(cuts[s + 1] - cuts[s]));
    const double a = s == 0 ? cuts[s] : cuts[s] + eps;
    const double b = s + 2 == cuts.size() ? cuts[s + 1] : cuts[s + 1] - eps;
    state = integrate_ode(rhs, a, state, b, opts).final_state();
  }
  return Mat<double>(n, k, state);
}

double min_eig_ratio(const Mat<double>& g) {
  const std::size_t n = g.rows();
  if (n == 1) return g(0, 0) > 0.0 ? 1.0 : (g(0, 0) == 0.0 ? 0.0 : -1.0);
  double lo = 0.0;
  double hi = 0.0;
  if (n == 2) {
    const double tr = 0.5 * (g(0, 0) + g(1, 1));
    const double d = std::hypot(0.5 * (g(0, 0) - g(1, 1)), 0.5 * (g(0, 1) + g(1, 0)));
    lo = tr - d;
    hi = tr + d;
  } else {
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e(i, j) = 0.5 * (g(i, j) + g(j, i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
    lo = es.eigenvalues().minCoeff();
    hi = es.eigenvalues().maxCoeff();
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  return scale == 0.0 ? 0.0 : lo / scale;
}

Mat<double> combine(const std::vector<Mat<double>>& basis, const std::vector<double>& c) {
  Mat<double> g(basis.front().rows(), basis.front().cols());
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (std::size_t i = 0; i < g.data().size(); ++i) g.data()[i] += c[k] * basis[k].data()[i];
  return g;
}

// Lift of a quantity defined on one period by q(x + 2π) = jump + mult q(x).
double lift_affine(double x, const std::function<double(double)>& on_period, double jump, double mult) {
  const double k = std::floor(x / kTwoPi);
  double r = x - k * kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  double v = on_period(r);
  if (k > 0) {
    for (long i = 0; i < static_cast<long>(k); ++i) v = jump + mult * v;
  } else {
    for (long i = 0; i < static_cast<long>(-k); ++i) v = (v - jump) / mult;
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> Path::start() const {
  if (segments.empty()) throw DomainError("empty path");
  return segments.front().position(segments.front().t_start);
}

std::vector<double> Path::end() const {
  if (segments.empty()) throw DomainError("empty path");
  return segments.back().position(segments.back().t_end);
}

Path Path::inverse() const {
  Path out;
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) out.segments.push_back(it->reversed());
  return out;
}

Path Path::then(const Path& other) const {
  Path out = *this;
  out.segments.insert(out.segments.end(), other.segments.begin(), other.segments.end());
  return out;
}

LoopDescriptor LoopDescriptor::inverse() const { return LoopDescriptor{base, path.inverse(), tag + "^-1"}; }

LoopDescriptor LoopDescriptor::then(const LoopDescriptor& other) const {
  return LoopDescriptor{base, path.then(other.path), tag + "*" + other.tag};
}

LoopDescriptor LoopDescriptor::constant(std::vector<double> base) {
  return LoopDescriptor{base, Path{{Curve::constant(base)}}, "constant"};
}

LoopDescriptor LoopDescriptor::generator(std::vector<double> base, std::size_t axis, std::string tag) {
  Curve c = Curve::axis_segment(base, axis, kTwoPi);
  return LoopDescriptor{std::move(base), Path{{std::move(c)}}, std::move(tag)};
}

// ---------------------------------------------------------------------------

std::vector<double> parallel_transport(const Connection& conn, const Curve& curve, std::vector<double> v0,
                                       double tol) {
  const std::size_t n = v0.size();
  Mat<double> x0(n, 1, std::move(v0));
  return transport_block(conn, curve, x0, tol).data();
}

std::vector<double> parallel_transport(const Connection& conn, const Path& path, std::vector<double> v0,
                                       double tol) {
  for (const Curve& c : path.segments) v0 = parallel_transport(conn, c, std::move(v0), tol);
  return v0;
}

Mat<double> transport_matrix(const Connection& conn, const Path& path, double tol) {
  Mat<double> x = Mat<double>::identity(conn.dim());
  for (const Curve& c : path.segments) x = transport_block(conn, c, x, tol);
  return x;
}

TransportMap loop_transport(const Connection& conn, const LoopDescriptor& loop, double tol) {
  if (!loop.path.segments.empty()) {
    std::vector<double> a = conn.chart.wrap(loop.path.start());
    std::vector<double> b = conn.chart.wrap(loop.path.end());
    std::vector<double> base = conn.chart.wrap(loop.base);
    for (std::size_t i = 0; i < a.size(); ++i) {
      double da = std::abs(a[i] - base[i]);
      double db = std::abs(b[i] - base[i]);
      if (conn.chart.periodic[i]) {
        da = std::min(da, kTwoPi - da);
        db = std::min(db, kTwoPi - db);
      }
      if (da > 1e-9 || db > 1e-9) throw DomainError("loop does not start and end at its base point");
    }
  }
  return TransportMap{transport_matrix(conn, loop.path, tol), loop.tag, tol};
}

// ---------------------------------------------------------------------------

FlatMetrizability flat_metrizability(const Connection& conn, const std::vector<LoopDescriptor>& generators,
                                     const std::vector<std::vector<double>>& grid, double flat_tol, double tol) {
  FlatMetrizability rep;
  rep.max_curvature = max_curvature(conn, grid);
  if (rep.max_curvature > flat_tol) {
    throw PreconditionError("flat_metrizability: connection is not flat (max |R| = " +
                            std::to_string(rep.max_curvature) + ")");
  }
  const std::size_t n = conn.dim();
  for (const auto& g : generators) rep.transports.push_back(loop_transport(conn, g, tol));

  // Symmetric basis E_(ij), i <= j.
  std::vector<Mat<double>> sym;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Mat<double> e(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      sym.push_back(e);
    }
  const std::size_t k = sym.size();
  Eigen::MatrixXd a(std::max<std::size_t>(1, rep.transports.size() * k), k);
  a.setZero();
  for (std::size_t t = 0; t < rep.transports.size(); ++t) {
    const Mat<double>& p = rep.transports[t].matrix;
    for (std::size_t c = 0; c < k; ++c) {
      Mat<double> r = p.transpose() * sym[c] * p - sym[c];
      std::size_t row = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a(t * k + row++, c) = r(i, j);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = 1e-7 * std::max(1.0, s.size() ? s(0) : 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const bool null = static_cast<Eigen::Index>(c) >= s.size() || s(c) <= cut;
    if (!null) continue;
    std::vector<double> coef(k);
    for (std::size_t q = 0; q < k; ++q) coef[q] = svd.matrixV()(q, c);
    rep.invariant_basis.push_back(combine(sym, coef));
  }
  if (rep.invariant_basis.empty()) return rep;

  // Projection of the identity first; it is the answer whenever every
  // transport is orthogonal.
  const std::size_t d = rep.invariant_basis.size();
  Eigen::MatrixXd gram(d, d);
  Eigen::VectorXd rhs(d);
  Mat<double> id = Mat<double>::identity(n);
  for (std::size_t i = 0; i < d; ++i) {
    double r = 0.0;
    for (std::size_t q = 0; q < n * n; ++q) r += rep.invariant_basis[i].data()[q] * id.data()[q];
    rhs(i) = r;
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (std::size_t q = 0; q < n * n; ++q) v += rep.invariant_basis[i].data()[q] * rep.invariant_basis[j].data()[q];
      gram(i, j) = v;
    }
  }
  Eigen::VectorXd c0 = gram.ldlt().solve(rhs);
  std::vector<double> best(c0.data(), c0.data() + d);
  double best_score = min_eig_ratio(combine(rep.invariant_basis, best));

  if (best_score <= 0.0) {
    // Sweep the coefficient cube at resolution 1e-2, then refine locally.
    const int steps = 200;
    std::vector<int> idx(d, 0);
    std::vector<double> c(d);
    while (true) {
      for (std::size_t i = 0; i < d; ++i) c[i] = -1.0 + 2.0 * idx[i] / steps;
      const double sc = min_eig_ratio(combine(rep.invariant_basis, c));
      if (sc > best_score) {
        best_score = sc;
        best = c;
      }
      std::size_t pos = 0;
      while (pos < d && ++idx[pos] > steps) idx[pos++] = 0;
      if (pos == d) break;
    }
    for (double h = 1e-2; h > 1e-9; h *= 0.5) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (std::size_t i = 0; i < d; ++i)
          for (double sgn : {-1.0, 1.0}) {
            std::vector<double> trial = best;
            trial[i] += sgn * h;
            const double sc = min_eig_ratio(combine(rep.invariant_basis, trial));
            if (sc > best_score) {
              best_score = sc;
              best = trial;
              improved = true;
            }
          }
      }
    }
  }
  if (best_score <= 1e-9) return rep;
  Mat<double> g = combine(rep.invariant_basis, best);
  const double norm = g(0, 0);
  for (double& v : g.data()) v /= norm;
  rep.g0 = g;
  rep.metrizable = true;
  return rep;
}

Mat<double> metric_by_transport(const Connection& conn, const Mat<double>& g0, const Path& path, double tol) {
  Mat<double> pinv = inverse(transport_matrix(conn, path, tol));
  return pinv.transpose() * g0 * pinv;
}

// ---------------------------------------------------------------------------

OneDimReport lagrangian_1d(const ScalarFn& psi1, const ScalarFn& psi2, bool periodic, double tol, double range) {
  OneDimReport rep;
  rep.periodic = periodic;
  // y = (∫Ψ₂, ∫Ψ₁ M̂) with M̂ = exp(−2 y0).
  OdeRhs rhs = [&psi1, &psi2](double x, std::span<const double> y, std::span<double> dy) {
    dy[0] = psi2(x);
    dy[1] = psi1(x) * std::exp(-2.0 * y[0]);
  };
  OdeOptions opts;
  opts.tol = 1e-12;
  opts.step = 0.0;
  opts.max_step = 0.05;

  if (periodic) {
    auto sol = std::make_shared<OdeSolution>(integrate_ode(rhs, 0.0, {0.0, 0.0}, kTwoPi, opts));
    rep.int_psi2 = quad(psi2, 0.0, kTwoPi, 1e-13);
    rep.int_psi1_m = sol->final_state()[1];
    const double mult = std::exp(-2.0 * sol->final_state()[0]);
    const double jump = -rep.int_psi1_m;
    rep.m_hat = [sol, mult](double x) {
      return lift_affine(x, [sol](double r) { return std::exp(-2.0 * sol->at(r)[0]); }, 0.0, mult);
    };
    rep.p_hat = [sol, mult, jump](double x) {
      return lift_affine(x, [sol](double r) { return -sol->at(r)[1]; }, jump, mult);
    };
    rep.metrizable = std::abs(rep.int_psi2) < tol;
    rep.lagrangian = rep.metrizable && std::abs(rep.int_psi1_m) < tol;
    auto wrap = [](double x) {
      double r = std::fmod(x, kTwoPi);
      return r < 0.0 ? r + kTwoPi : r;
    };
    if (rep.metrizable) {
      ScalarFn mh = rep.m_hat;
      rep.m = [mh, wrap](double t) { return mh(wrap(t)); };
    }
    if (rep.lagrangian) {
      ScalarFn ph = rep.p_hat;
      rep.p_c = [ph, wrap](double t) { return ph(wrap(t)); };
    }
    return rep;
  }

  auto fwd = std::make_shared<OdeSolution>(integrate_ode(rhs, 0.0, {0.0, 0.0}, range, opts));
  auto bwd = std::make_shared<OdeSolution>(integrate_ode(rhs, 0.0, {0.0, 0.0}, -range, opts));
  auto at = [fwd, bwd, range](double x) {
    if (std::abs(x) > range) throw DomainError("lagrangian_1d: point outside the integrated range");
    return x >= 0.0 ? fwd->at(x) : bwd->at(x);
  };
  rep.m_hat = [at](double x) { return std::exp(-2.0 * at(x)[0]); };
  rep.p_hat = [at](double x) { return -at(x)[1]; };
  rep.metrizable = true;
  rep.lagrangian = true;
  rep.m = rep.m_hat;
  rep.p_c = rep.p_hat;
  return rep;
}

OneDimReport metrizability_1d(const ScalarFn& psi2, bool periodic, double tol) {
  return lagrangian_1d([](double) { return 0.0; }, psi2, periodic, tol);
}

double el_residual_1d(const OneDimReport& rep, const ScalarFn& psi1, const ScalarFn& psi2,
                      const std::vector<std::pair<double, double>>& states) {
  auto d4 = [](const ScalarFn& f, double x) {
    const double h = 1e-3;
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
  };
  double worst = 0.0;
  for (auto [th, thd] : states) {
    const double m = rep.m_hat(th);
    const double dm = d4(rep.m_hat, th);
    const double dp = d4(rep.p_hat, th);
    // M θ̈ + ½ M' θ̇² + P' = 0.
    const double acc_el = -(0.5 * dm * thd * thd + dp) / m;
    const double acc = psi1(th) + psi2(th) * thd * thd;
    worst = std::max(worst, std::abs(acc_el - acc));
  }
  return worst;
}

// ---------------------------------------------------------------------------

CylinderIntegrals cylinder_integrals(const Connection& conn, double tol, double struct_tol) {
  const Chart& ch = conn.chart;
  if (ch.dim != 2 || ch.periodic[0] || !ch.periodic[1]) {
    throw PreconditionError("cylinder_integrals: chart must be R x S^1 with the second coordinate periodic");
  }
  // Reference value of θ¹: inside the chart even when it is bounded.
  const double ref = std::isfinite(ch.lo[0]) && std::isfinite(ch.hi[0]) ? 0.5 * (ch.lo[0] + ch.hi[0]) : 0.0;
  CylinderIntegrals ci;
  for (const auto& p : ch.grid(9)) {
    Rank3<double> g = conn.at(p);
    Rank3<double> g0 = conn.at(std::vector<double>{ref, p[1]});
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
          double v = std::abs(g(k, i, j) - g0(k, i, j));
          if (!(i == 1 && j == 1)) v = std::max(v, std::abs(g(k, i, j)));
          ci.structure_defect = std::max(ci.structure_defect, v);
        }
  }
  if (ci.structure_defect > struct_tol) {
    throw PreconditionError("cylinder_integrals: connection does not have the R x S^1 structure (defect " +
                            std::to_string(ci.structure_defect) + ")");
  }
  Connection c = conn;
  ci.g122 = [c, ref](double t) { return c.at(std::vector<double>{ref, t})(0, 1, 1); };
  ci.g222 = [c, ref](double t) { return c.at(std::vector<double>{ref, t})(1, 1, 1); };
  ScalarFn g122 = ci.g122;
  ScalarFn g222 = ci.g222;
  OdeRhs rhs = [g122, g222](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = -g222(t);
    dy[1] = g122(t) * std::exp(y[0]);
  };
  OdeOptions opts;
  opts.tol = tol;
  opts.step = 0.0;
  opts.max_step = 0.05;
  auto sol = std::make_shared<OdeSolution>(integrate_ode(rhs, 0.0, {0.0, 0.0}, kTwoPi, opts));
  ci.i1_period = sol->final_state()[0];
  ci.i2_period = sol->final_state()[1];
  const double i1p = ci.i1_period;
  const double i2p = ci.i2_period;
  ci.i1 = [sol, i1p](double t) {
    const double k = std::floor(t / kTwoPi);
    double r = t - k * kTwoPi;
    if (r >= kTwoPi) r -= kTwoPi;
    return sol->at(r)[0] + k * i1p;
  };
  ci.i2 = [sol, i1p, i2p](double t) {
    return lift_affine(t, [sol](double r) { return sol->at(r)[1]; }, i2p, std::exp(i1p));
  };
  return ci;
}

Mat<double> cylinder_transport(const CylinderIntegrals& ci, double theta2) {
  Mat<double> p(2, 2);
  p(0, 0) = 1.0;
  p(0, 1) = -ci.i2(theta2);
  p(1, 1) = std::exp(ci.i1(theta2));
  return p;
}

}  // namespace vhc
