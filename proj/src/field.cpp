#include "vhc/field.hpp"

#include <algorithm>
#include <cmath>

namespace vhc {

Field Field::black_box(std::size_t in, Shape shape, Eval<double> f, double rel_step) {
  auto impl = std::make_shared<Impl>();
  impl->in = in;
  impl->shape = shape;
  impl->depth = 1;
  impl->e0 = f;
  // First-order lift: value from f, tangent from a central-difference
  // directional derivative along the tangent part of x.
  impl->e1 = [f, rel_step](std::span<const AD1> x) {
    std::vector<double> xv(x.size());
    std::vector<double> xd(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      xv[i] = x[i].v;
      xd[i] = x[i].d;
    }
    std::vector<double> base = f(xv);
    std::vector<double> tangent(base.size(), 0.0);
    std::vector<double> probe = xv;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (xd[i] == 0.0) continue;
      double h = rel_step * std::max(1.0, std::abs(xv[i]));
      probe[i] = xv[i] + h;
      std::vector<double> up = f(probe);
      probe[i] = xv[i] - h;
      std::vector<double> down = f(probe);
      probe[i] = xv[i];
      for (std::size_t k = 0; k < base.size(); ++k) tangent[k] += xd[i] * (up[k] - down[k]) / (2.0 * h);
    }
    std::vector<AD1> out(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) out[k] = AD1(base[k], tangent[k]);
    return out;
  };
  return Field(std::move(impl));
}

Field Field::with_jacobian(std::size_t in, Shape shape, Eval<double> f, Eval<double> jac) {
  auto impl = std::make_shared<Impl>();
  impl->in = in;
  impl->shape = shape;
  impl->depth = 1;
  impl->e0 = f;
  impl->e1 = [f, jac, in](std::span<const AD1> x) {
    std::vector<double> xv(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xv[i] = x[i].v;
    std::vector<double> base = f(xv);
    std::vector<double> j = jac(xv);
    if (j.size() != base.size() * in) throw DimensionError("supplied Jacobian has the wrong size");
    std::vector<AD1> out(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      double t = 0.0;
      for (std::size_t i = 0; i < in; ++i) t += j[k * in + i] * x[i].d;
      out[k] = AD1(base[k], t);
    }
    return out;
  };
  return Field(std::move(impl));
}

void Field::check_input(std::size_t n) const {
  if (!impl_) throw DomainError("evaluation of an empty field");
  if (n != impl_->in) {
    throw DimensionError("field expects " + std::to_string(impl_->in) + " inputs, got " + std::to_string(n));
  }
}

void Field::check_output(std::size_t n) const {
  if (n != impl_->shape.size()) {
    throw DimensionError("field produced " + std::to_string(n) + " components, declared " +
                         std::to_string(impl_->shape.size()));
  }
}

void Field::throw_depth(int requested) {
  throw DepthError("field cannot be evaluated at dual depth " + std::to_string(requested));
}

}  // namespace vhc
