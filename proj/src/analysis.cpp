#include "vhc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vhc/error.hpp"

namespace vhc {

namespace {

std::size_t grid_points(const ModelBundle& bundle, std::size_t requested) {
  return requested ? requested : bundle.grid_points;
}

void take_structure(AnalysisResult& res, const LagrangianReport& rep) {
  res.verdict = rep.lagrangian ? Verdict::lagrangian : Verdict::not_lagrangian;
  res.metrizable = rep.metrizable;
  res.potential_exists = rep.potential_exists;
  res.method = rep.method;
  res.note = rep.note;
  res.recurrence_residual = rep.recurrence_residual;
  res.closedness_residual = rep.closedness_residual;
  res.loop_integrals = rep.loop_integrals;
  res.a = rep.a;
  res.b = rep.b;
  if (rep.ric_sign != Definiteness::indefinite || !std::isnan(rep.recurrence_residual))
    res.ric_sign = to_string(rep.ric_sign);
  res.metric = rep.metric;
  if (rep.lagrangian) res.potential = rep.potential;
}

void one_dimensional(AnalysisResult& res, const ConstrainedSystem& cs, const ModelBundle& bundle,
                     const AnalysisOptions& opts) {
  auto psi1 = [cs](double t) { return cs.psi_functions(t).first; };
  auto psi2 = [cs](double t) { return cs.psi_functions(t).second; };
  const bool periodic = cs.parametrization().reduced.periodic[0];
  OneDimReport rep = lagrangian_1d(psi1, psi2, periodic);
  res.method = "one-dimensional";
  res.metrizable = rep.metrizable;
  res.potential_exists = rep.lagrangian;
  res.verdict = rep.lagrangian ? Verdict::lagrangian : Verdict::not_lagrangian;
  res.int_psi2 = rep.int_psi2;
  res.int_psi1_m = rep.int_psi1_m;
  if (!rep.metrizable) {
    res.note = "the integral of Psi2 over a period is nonzero: no invariant metric";
    return;
  }
  ScalarFn m = rep.m;
  res.metric = Field::black_box(1, Shape{1, 1}, [m](std::span<const double> x) { return std::vector<double>{m(x[0])}; });
  if (!rep.lagrangian) {
    res.note = "metrizable, but the integral of Psi1 M over a period is nonzero: no potential";
    return;
  }
  ScalarFn p = rep.p_c;
  res.potential = Field::black_box(1, Shape{1, 1}, [p](std::span<const double> x) { return std::vector<double>{p(x[0])}; });
  std::vector<std::pair<double, double>> states;
  for (const auto& [th, thd] : random_states(bundle, opts.el_states, opts.seed, opts.grid))
    states.emplace_back(th[0], thd[0]);
  res.el_residual = el_residual_1d(rep, psi1, psi2, states);
}

void two_dimensional(AnalysisResult& res, const ConstrainedSystem& cs, const ModelBundle& bundle,
                     const std::vector<std::vector<double>>& grid, const AnalysisOptions& opts) {
  const Connection conn = cs.induced_connection();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& p : grid) {
    const double k = max_curvature(conn, {p});
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  res.max_curvature = hi;
  res.min_curvature = lo;
  if (hi < opts.flat_tol) {
    FlatMetrizability fm = flat_metrizability(conn, bundle.generators, grid, opts.flat_tol);
    res.metrizable = fm.metrizable;
    try {
      take_structure(res, cylinder_lagrangian_search(cs, opts.cylinder));
    } catch (const PreconditionError& e) {
      if (!fm.metrizable) {
        res.method = "flat-holonomy";
        res.verdict = Verdict::not_lagrangian;
        res.note = "holonomy preserves no inner product";
        return;
      }
      throw UnsupportedError(std::string("flat and metrizable, but outside the cylinder search: ") + e.what());
    }
  } else if (lo > opts.curved_tol) {
    take_structure(res, ricci_lagrangian(cs, bundle.generators, grid, opts.tol));
  } else {
    throw UnsupportedError("curvature vanishes on part of the grid only (min " + std::to_string(lo) + ", max " +
                           std::to_string(hi) + ")");
  }
  if (res.lagrangian())
    res.el_residual =
        lagrangian_residual(res.metric, res.potential, cs, random_states(bundle, opts.el_states, opts.seed, opts.grid));
}

}  // namespace

const char* to_string(Verdict v) { return v == Verdict::lagrangian ? "lagrangian" : "not_lagrangian"; }

LagrangianReport AnalysisResult::structure() const {
  LagrangianReport rep;
  rep.lagrangian = lagrangian();
  rep.metrizable = metrizable;
  rep.potential_exists = potential_exists;
  rep.method = method;
  rep.metric = metric;
  rep.potential = potential;
  rep.a = a;
  rep.b = b;
  return rep;
}

std::vector<std::pair<std::vector<double>, std::vector<double>>> random_states(const ModelBundle& bundle,
                                                                              std::size_t count,
                                                                              std::uint64_t seed, std::size_t grid) {
  const auto pts = bundle.parametrization.reduced.grid(grid_points(bundle, grid), bundle.grid_margin);
  const std::size_t n = bundle.parametrization.dim();
  std::vector<double> lo(n, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
  for (const auto& p : pts)
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> th(n);
    std::vector<double> thd(n);
    for (std::size_t i = 0; i < n; ++i) th[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
    for (std::size_t i = 0; i < n; ++i) thd[i] = 2.0 * unit(rng) - 1.0;
    out.emplace_back(std::move(th), std::move(thd));
  }
  return out;
}

AnalysisResult analyze(const ModelBundle& bundle, const AnalysisOptions& opts) {
  const ConstrainedSystem cs = bundle.constrained();
  AnalysisResult res;
  res.model = bundle.name;
  res.params = bundle.params;
  res.reduced_dim = cs.reduced_dim();
  if (res.reduced_dim == 0 || res.reduced_dim > 2)
    throw UnsupportedError("reduced dimension " + std::to_string(res.reduced_dim) + " is not supported (1 or 2)");
  const auto grid = bundle.parametrization.reduced.grid(grid_points(bundle, opts.grid), bundle.grid_margin);

  res.regularity = check_regularity(cs, grid);
  if (!res.regularity.regular)
    throw PreconditionError("the constraint is not regular on the grid (min singular-value ratio " +
                            std::to_string(res.regularity.min_ratio) + ")");
  const Connection conn = cs.induced_connection();
  for (const auto& g : bundle.generators) res.holonomy.push_back(loop_transport(conn, g));

  res.orthogonality = orthogonality_check(cs, grid);
  if (res.orthogonality.orthogonal) {
    RestrictedStructure rs = restricted_structure(cs, grid);
    res.method = "orthogonal-forces";
    res.note = "control forces are orthogonal to the constraint; the restricted Lagrangian applies";
    res.verdict = Verdict::lagrangian;
    res.metrizable = res.potential_exists = true;
    res.metric = rs.metric;
    res.potential = rs.potential;
    res.el_residual =
        lagrangian_residual(res.metric, res.potential, cs, random_states(bundle, opts.el_states, opts.seed, opts.grid));
  } else if (res.reduced_dim == 1) {
    one_dimensional(res, cs, bundle, opts);
  } else {
    two_dimensional(res, cs, bundle, grid, opts);
  }

  // A few fixed sample points for reports: first, middle and last grid point.
  if (!res.metric.empty()) {
    for (std::size_t idx : {std::size_t{0}, grid.size() / 2, grid.size() - 1}) {
      MetricSample s;
      s.theta = grid[idx];
      s.metric = Mat<double>(res.reduced_dim, res.reduced_dim, res.metric(std::span<const double>(s.theta)));
      s.potential = res.potential.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : res.potential.scalar(std::span<const double>(s.theta));
      res.samples.push_back(std::move(s));
    }
  }
  return res;
}

}  // namespace vhc
