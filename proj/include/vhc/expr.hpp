#pragma once

// Small expression language for user-defined systems: numbers, variables,
// named constants, + - * / ^, unary minus and the functions sin, cos, tan,
// exp, log, sqrt, atan, atan2, abs. Evaluation is templated so the fields it
// builds stay differentiable by dual numbers.

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vhc/dual.hpp"
#include "vhc/error.hpp"
#include "vhc/field.hpp"

namespace vhc {

class Expr {
 public:
  /// Identifiers resolve first against `variables` (argument positions),
  /// then `constants`; `pi` is always defined. Throws DomainError with the
  /// offending position on syntax errors or unknown names.
  static Expr parse(const std::string& text, const std::vector<std::string>& variables,
                    const std::map<std::string, double>& constants = {});

  template <class T>
  T eval(std::span<const T> x) const {
    return eval_node<T>(root_, x);
  }

  const std::string& text() const { return text_; }
  std::size_t arity() const { return arity_; }

 private:
  enum class Op { number, variable, neg, add, sub, mul, div, pow, call1, call2 };
  enum class Fn { sin, cos, tan, exp, log, sqrt, atan, abs, atan2 };
  struct Node {
    Op op = Op::number;
    double value = 0.0;
    std::size_t index = 0;
    Fn fn = Fn::sin;
    int a = -1;
    int b = -1;
  };
  friend class ExprParser;

  template <class T>
  T eval_node(int id, std::span<const T> x) const {
    using std::abs;
    using std::atan;
    using std::atan2;
    using std::cos;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sqrt;
    using std::tan;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::number:
        return T(n.value);
      case Op::variable:
        return x[n.index];
      case Op::neg:
        return -eval_node<T>(n.a, x);
      case Op::add:
        return eval_node<T>(n.a, x) + eval_node<T>(n.b, x);
      case Op::sub:
        return eval_node<T>(n.a, x) - eval_node<T>(n.b, x);
      case Op::mul:
        return eval_node<T>(n.a, x) * eval_node<T>(n.b, x);
      case Op::div:
        return eval_node<T>(n.a, x) / eval_node<T>(n.b, x);
      case Op::pow: {
        const Node& e = nodes_[static_cast<std::size_t>(n.b)];
        T base = eval_node<T>(n.a, x);
        if (e.op == Op::number) {
          if (e.value == std::floor(e.value) && std::abs(e.value) <= 64) return pow(base, static_cast<int>(e.value));
          return pow(base, e.value);
        }
        return exp(eval_node<T>(n.b, x) * log(base));
      }
      case Op::call1: {
        T a = eval_node<T>(n.a, x);
        switch (n.fn) {
          case Fn::sin:
            return sin(a);
          case Fn::cos:
            return cos(a);
          case Fn::tan:
            return tan(a);
          case Fn::exp:
            return exp(a);
          case Fn::log:
            return log(a);
          case Fn::sqrt:
            return sqrt(a);
          case Fn::atan:
            return atan(a);
          case Fn::abs:
            return abs(a);
          default:
            break;
        }
        break;
      }
      case Op::call2:
        return atan2(eval_node<T>(n.a, x), eval_node<T>(n.b, x));
    }
    throw DomainError("expression: corrupt node");
  }

  std::vector<Node> nodes_;
  int root_ = -1;
  std::size_t arity_ = 0;
  std::string text_;
};

/// Field whose components (row-major for matrices) are the given
/// expressions of `in` variables.
Field expr_field(std::vector<Expr> components, std::size_t in, Shape shape);

}  // namespace vhc
