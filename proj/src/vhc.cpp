#include "vhc/vhc.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "vhc/error.hpp"

namespace vhc {

namespace {

Eigen::MatrixXd to_eigen(const Mat<double>& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace

Field LagrangianControlSystem::gradient_of(const Field& potential) {
  const std::size_t n = potential.in_dim();
  return Field::smooth(n, Shape{n, 1}, [potential]<class T>(std::span<const T> x) {
    return jacobian(potential, x).data();
  });
}

ConstrainedSystem::ConstrainedSystem(LagrangianControlSystem sys, ConstraintParametrization par)
    : sys_(std::move(sys)), par_(std::move(par)) {
  const std::size_t n = sys_.dim();
  const std::size_t r = par_.dim();
  if (par_.phi.in_dim() != r || par_.phi.out_dim() != n) throw DimensionError("parametrization does not map into the chart");
  if (sys_.inertia.shape() != Shape{n, n}) throw DimensionError("inertia must be n x n");
  if (sys_.input.shape().rows != n) throw DimensionError("input matrix must have n rows");
  if (sys_.annihilator.shape() != Shape{n - sys_.inputs(), n}) throw DimensionError("annihilator must be (n-m) x n");
  if (r + sys_.inputs() != n) throw DimensionError("reduced dimension must equal n - m");
  if (sys_.grad_potential.out_dim() != n) throw DimensionError("gradient of P must have n components");
  if (sys_.constraint && sys_.constraint->out_dim() != sys_.inputs())
    throw DimensionError("constraint function must have m components");
}

Connection ConstrainedSystem::induced_connection() const {
  const std::size_t r = reduced_dim();
  ConstrainedSystem self = *this;
  Field f = Field::smooth(r, Shape{r * r * r, 1}, [self]<class T>(std::span<const T> theta) {
    return self.induced_christoffels(theta).data;
  });
  return Connection{par_.reduced, std::move(f), true};
}

Field ConstrainedSystem::lambda_field() const {
  const std::size_t r = reduced_dim();
  ConstrainedSystem self = *this;
  return Field::smooth(r, Shape{r, 1}, [self]<class T>(std::span<const T> theta) {
    return self.reduced_potential(theta);
  });
}

std::vector<double> ConstrainedSystem::projection_sigma(std::span<const double> theta,
                                                        std::span<const double> v) const {
  if (v.size() != ambient_dim()) throw DimensionError("projection_sigma: ambient vector has wrong size");
  Mat<double> p = projector(theta);
  return p * std::vector<double>(v.begin(), v.end());
}

std::vector<double> ConstrainedSystem::constrained_rhs(std::span<const double> theta,
                                                       std::span<const double> theta_dot) const {
  const std::size_t r = reduced_dim();
  if (theta.size() != r || theta_dot.size() != r) throw DimensionError("constrained_rhs: state has wrong size");
  Rank3<double> g = induced_christoffels(theta);
  std::vector<double> lam = reduced_potential(theta);
  std::vector<double> acc(r);
  for (std::size_t k = 0; k < r; ++k) {
    double s = -lam[k];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) s -= g(k, i, j) * theta_dot[i] * theta_dot[j];
    acc[k] = s;
  }
  return acc;
}

std::pair<double, double> ConstrainedSystem::psi_functions(double theta) const {
  if (reduced_dim() != 1) throw DimensionError("psi_functions needs a one-dimensional constraint");
  const std::size_t n = ambient_dim();
  std::vector<double> th{theta};
  std::span<const double> ts(th);
  std::vector<double> x = par_.phi(ts);
  std::span<const double> xs(x);
  Mat<double> d(n, n, sys_.inertia(xs));
  Mat<double> bp(1, n, sys_.annihilator(xs));
  Mat<double> bpd = bp * d;
  Mat<double> dphi = par_.dphi(ts);
  std::vector<Mat<double>> d2 = par_.d2phi(ts);
  Rank3<double> amb = christoffel_from_metric(sys_.inertia, xs);
  std::vector<double> gp = sys_.grad_potential(xs);

  double denom = 0.0;
  for (std::size_t a = 0; a < n; ++a) denom += bpd(0, a) * dphi(a, 0);
  if (std::abs(denom) < 1e-12) throw SingularError("psi_functions: B⊥ D φ' vanishes (regularity lost)");
  double num1 = 0.0;
  for (std::size_t a = 0; a < n; ++a) num1 += bp(0, a) * gp[a];
  double num2 = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double quad = 0.0;
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) quad += dphi(b, 0) * amb(a, b, c) * dphi(c, 0);
    num2 += bpd(0, a) * (d2[a](0, 0) + quad);
  }
  return {-num1 / denom, -num2 / denom};
}

std::vector<double> ConstrainedSystem::full_acceleration(std::span<const double> q, std::span<const double> qdot,
                                                         std::span<const double> tau) const {
  const std::size_t n = ambient_dim();
  const std::size_t m = sys_.inputs();
  if (q.size() != n || qdot.size() != n || tau.size() != m) throw DimensionError("full_acceleration: bad sizes");
  Mat<double> d(n, n, sys_.inertia(q));
  Mat<double> b(n, m, sys_.input(q));
  std::vector<double> force = b * std::vector<double>(tau.begin(), tau.end());
  std::vector<double> gp = sys_.grad_potential(q);
  for (std::size_t i = 0; i < n; ++i) force[i] -= gp[i];
  std::vector<double> acc = solve(d, force);
  Rank3<double> g = christoffel_from_metric(sys_.inertia, q);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) acc[k] -= g(k, i, j) * qdot[i] * qdot[j];
  return acc;
}

std::vector<double> ConstrainedSystem::stabilizing_feedback(std::span<const double> q, std::span<const double> qdot,
                                                            double kp, double kd) const {
  if (!sys_.constraint) throw PreconditionError("stabilizing_feedback needs the constraint function h");
  const Field& h = *sys_.constraint;
  const std::size_t n = ambient_dim();
  const std::size_t m = sys_.inputs();
  if (q.size() != n || qdot.size() != n) throw DimensionError("stabilizing_feedback: bad state size");

  std::vector<double> hv = h(q);
  Mat<double> dh = jacobian(h, q);  // m x n
  Mat<double> d(n, n, sys_.inertia(q));
  Mat<double> b(n, m, sys_.input(q));
  Mat<double> dinv_b = solve(d, b);
  Mat<double> bmat = dh * dinv_b;  // m x m

  // Drift of ḧ: dh(−Γ(q̇,q̇) − D⁻¹∇P) + q̇ᵀ ∇²h q̇.
  std::vector<double> zero_tau(m, 0.0);
  std::vector<double> drift_acc = full_acceleration(q, qdot, zero_tau);
  std::vector<double> qd(qdot.begin(), qdot.end());
  std::vector<double> hdot = dh * qd;
  std::vector<double> drift = dh * drift_acc;
  std::vector<double> rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    Mat<double> hess = hessian(h, q, i);
    double curv = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = 0; c < n; ++c) curv += qd[a] * hess(a, c) * qd[c];
    rhs[i] = -kp * hv[i] - kd * hdot[i] - curv - drift[i];
  }
  try {
    return solve(bmat, rhs);
  } catch (const SingularError&) {
    throw SingularError("stabilizing_feedback: dh D⁻¹ B is singular (regularity lost)");
  }
}

// ---------------------------------------------------------------------------

RegularityReport check_regularity(const ConstrainedSystem& cs, const std::vector<std::vector<double>>& grid,
                                  double tol) {
  const auto& sys = cs.system();
  const std::size_t n = cs.ambient_dim();
  const std::size_t m = sys.inputs();
  RegularityReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& theta : grid) {
    std::span<const double> ts(theta);
    std::vector<double> x = cs.parametrization().phi(ts);
    Mat<double> d(n, n, sys.inertia(std::span<const double>(x)));
    Mat<double> b(n, m, sys.input(std::span<const double>(x)));
    Mat<double> dinv_b = solve(d, b);
    Mat<double> dphi = cs.parametrization().dphi(ts);
    Eigen::MatrixXd full(n, n);
    full.leftCols(cs.reduced_dim()) = to_eigen(dphi);
    full.rightCols(m) = to_eigen(dinv_b);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(full);
    const auto& s = svd.singularValues();
    double ratio = s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      rep.argmin = theta;
    }
  }
  rep.regular = rep.min_ratio > tol;
  return rep;
}

OrthogonalityReport orthogonality_check(const ConstrainedSystem& cs, const std::vector<std::vector<double>>& grid,
                                        double tol) {
  const auto& sys = cs.system();
  const std::size_t n = cs.ambient_dim();
  const std::size_t m = sys.inputs();
  OrthogonalityReport rep;
  for (const auto& theta : grid) {
    std::span<const double> ts(theta);
    std::vector<double> x = cs.parametrization().phi(ts);
    Mat<double> b(n, m, sys.input(std::span<const double>(x)));
    Mat<double> prod = cs.parametrization().dphi(ts).transpose() * b;
    double norm = 0.0;
    for (double v : prod.data()) norm += v * v;
    rep.max_defect = std::max(rep.max_defect, std::sqrt(norm));
  }
  rep.orthogonal = rep.max_defect < tol;
  return rep;
}

RestrictedStructure restricted_structure(const ConstrainedSystem& cs, const std::vector<std::vector<double>>& grid,
                                         double tol) {
  OrthogonalityReport o = orthogonality_check(cs, grid, tol);
  if (!o.orthogonal) {
    throw PreconditionError("restricted_structure: control forces are not orthogonal to the constraint");
  }
  const std::size_t r = cs.reduced_dim();
  const std::size_t n = cs.ambient_dim();
  const ConstraintParametrization par = cs.parametrization();
  const Field inertia = cs.system().inertia;
  const Field potential = cs.system().potential;
  Field metric = Field::smooth(r, Shape{r, r}, [par, inertia, n, r]<class T>(std::span<const T> theta) {
    std::vector<T> x = par.phi(theta);
    Mat<T> d(n, n, inertia(std::span<const T>(x)));
    Mat<T> j = par.dphi(theta);
    return (j.transpose() * d * j).data();
  });
  Field pot = Field::smooth(r, [par, potential]<class T>(std::span<const T> theta) {
    std::vector<T> x = par.phi(theta);
    return potential(std::span<const T>(x));
  });
  return RestrictedStructure{std::move(metric), std::move(pot)};
}

ConsistencyReport check_consistency(const ConstrainedSystem& cs, const std::vector<std::vector<double>>& grid) {
  const auto& sys = cs.system();
  const std::size_t n = cs.ambient_dim();
  const std::size_t m = sys.inputs();
  ConsistencyReport rep;
  rep.min_inertia_eig = std::numeric_limits<double>::infinity();
  for (const auto& theta : grid) {
    std::span<const double> ts(theta);
    std::vector<double> x = cs.parametrization().phi(ts);
    std::span<const double> xs(x);
    Mat<double> d(n, n, sys.inertia(xs));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(d));
    rep.min_inertia_eig = std::min(rep.min_inertia_eig, es.eigenvalues().minCoeff());

    Mat<double> bp(n - m, n, sys.annihilator(xs));
    Mat<double> b(n, m, sys.input(xs));
    const Mat<double> prod = bp * b;
    for (double v : prod.data()) rep.max_annihilation = std::max(rep.max_annihilation, std::abs(v));

    std::vector<double> gp = sys.grad_potential(xs);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p = x;
      const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
      p[i] = x[i] + h;
      double up = sys.potential.scalar(p);
      p[i] = x[i] - h;
      double down = sys.potential.scalar(p);
      rep.max_gradient_defect = std::max(rep.max_gradient_defect, std::abs(gp[i] - (up - down) / (2.0 * h)));
    }

    Mat<double> dphi = cs.parametrization().dphi(ts);
    for (std::size_t i = 0; i < cs.reduced_dim(); ++i) {
      std::vector<double> p = theta;
      const double h = 1e-6 * std::max(1.0, std::abs(theta[i]));
      p[i] = theta[i] + h;
      std::vector<double> up = cs.parametrization().phi(std::span<const double>(p));
      p[i] = theta[i] - h;
      std::vector<double> down = cs.parametrization().phi(std::span<const double>(p));
      for (std::size_t a = 0; a < n; ++a)
        rep.max_dphi_defect = std::max(rep.max_dphi_defect, std::abs(dphi(a, i) - (up[a] - down[a]) / (2.0 * h)));
    }
  }
  return rep;
}

}  // namespace vhc
