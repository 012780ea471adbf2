#pragma once

// Type-erased evaluable maps R^in -> R^(rows x cols).
//
// A smooth field is built from a generic callable and is instantiated for
// double and every supported dual depth, so derivatives of any field (and of
// fields derived from other fields) come from forward-mode propagation. A
// black-box field only knows doubles; its first-level dual evaluation falls
// back to central differences and deeper levels raise DepthError.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "vhc/dual.hpp"
#include "vhc/error.hpp"

namespace vhc {

template <class T>
using Eval = std::function<std::vector<T>(std::span<const T>)>;

struct Shape {
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

class Field {
 public:
  Field() = default;

  /// `f` must be callable as `f(std::span<const T>) -> std::vector<T>` for
  /// T in {double, AD1, ..., AD5}; a template lambda `[]<class T>(...)` fits.
  template <class F>
  static Field smooth(std::size_t in, Shape shape, F f) {
    auto impl = std::make_shared<Impl>();
    impl->in = in;
    impl->shape = shape;
    impl->depth = kMaxDualDepth;
    impl->e0 = [f](std::span<const double> x) { return std::vector<double>(f(x)); };
    impl->e1 = [f](std::span<const AD1> x) { return std::vector<AD1>(f(x)); };
    impl->e2 = [f](std::span<const AD2> x) { return std::vector<AD2>(f(x)); };
    impl->e3 = [f](std::span<const AD3> x) { return std::vector<AD3>(f(x)); };
    impl->e4 = [f](std::span<const AD4> x) { return std::vector<AD4>(f(x)); };
    impl->e5 = [f](std::span<const AD5> x) { return std::vector<AD5>(f(x)); };
    return Field(std::move(impl));
  }

  /// Scalar-valued convenience overload.
  template <class F>
  static Field smooth(std::size_t in, F f) {
    return smooth(in, Shape{1, 1}, std::move(f));
  }

  /// Field known only through double evaluations. `rel_step` is the
  /// relative central-difference step used for its derivatives.
  static Field black_box(std::size_t in, Shape shape, Eval<double> f, double rel_step = 1e-6);

  /// First-order field with a supplied Jacobian: `jac(x)` returns the
  /// out_dim x in_dim matrix row-major. Depth 1.
  static Field with_jacobian(std::size_t in, Shape shape, Eval<double> f, Eval<double> jac);

  template <class T>
  std::vector<T> operator()(std::span<const T> x) const {
    check_input(x.size());
    std::vector<T> out;
    if constexpr (std::is_same_v<T, double>) {
      out = impl_->e0(x);
    } else if constexpr (std::is_same_v<T, AD1>) {
      out = impl_->e1(x);
    } else if constexpr (std::is_same_v<T, AD2>) {
      if (!impl_->e2) throw_depth(2);
      out = impl_->e2(x);
    } else if constexpr (std::is_same_v<T, AD3>) {
      if (!impl_->e3) throw_depth(3);
      out = impl_->e3(x);
    } else if constexpr (std::is_same_v<T, AD4>) {
      if (!impl_->e4) throw_depth(4);
      out = impl_->e4(x);
    } else if constexpr (std::is_same_v<T, AD5>) {
      if (!impl_->e5) throw_depth(5);
      out = impl_->e5(x);
    } else {
      throw_depth(dual_depth<T>::value);
    }
    check_output(out.size());
    return out;
  }

  template <class T>
  std::vector<T> operator()(const std::vector<T>& x) const {
    return (*this)(std::span<const T>(x));
  }

  /// First component at a double point; the usual call for scalar fields.
  double scalar(std::span<const double> x) const { return (*this)(x).front(); }
  double scalar(const std::vector<double>& x) const { return scalar(std::span<const double>(x)); }

  std::size_t in_dim() const { return impl_->in; }
  Shape shape() const { return impl_->shape; }
  std::size_t out_dim() const { return impl_->shape.size(); }
  /// Number of nested dual levels this field can be evaluated at directly.
  int depth() const { return impl_->depth; }
  bool is_black_box() const { return impl_->depth < kMaxDualDepth; }
  bool empty() const { return impl_ == nullptr; }

 private:
  struct Impl {
    std::size_t in = 0;
    Shape shape;
    int depth = 0;
    Eval<double> e0;
    Eval<AD1> e1;
    Eval<AD2> e2;
    Eval<AD3> e3;
    Eval<AD4> e4;
    Eval<AD5> e5;
  };

  explicit Field(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  void check_input(std::size_t n) const;
  void check_output(std::size_t n) const;
  [[noreturn]] static void throw_depth(int requested);

  std::shared_ptr<const Impl> impl_;
};

}  // namespace vhc
