#include "vhc/expr.hpp"

#include <cctype>
#include <cstdlib>
#include <memory>
#include <numbers>

namespace vhc {

// Recursive descent:
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | '+' unary | power
//   power   := atom ('^' unary)?          (right associative)
//   atom    := number | name | name '(' sum (',' sum)? ')' | '(' sum ')'
class ExprParser {
 public:
  ExprParser(const std::string& text, const std::vector<std::string>& vars, const std::map<std::string, double>& consts)
      : s_(text), vars_(vars), consts_(consts) {}

  Expr run() {
    Expr e;
    e.text_ = s_;
    e.arity_ = vars_.size();
    out_ = &e;
    e.root_ = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  using Node = Expr::Node;
  using Op = Expr::Op;
  using Fn = Expr::Fn;

  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("expression '" + s_ + "' at " + std::to_string(pos_) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  // Nodes whose operands are all numbers are folded on the spot, so constant
  // exponents like 3^2 still take the integer-power path.
  int push(Node n) {
    auto& nodes = out_->nodes_;
    nodes.push_back(n);
    const int id = static_cast<int>(nodes.size() - 1);
    auto is_num = [&](int c) { return c < 0 || nodes[static_cast<std::size_t>(c)].op == Op::number; };
    if (n.op != Op::number && n.op != Op::variable && is_num(n.a) && is_num(n.b)) {
      const double v = out_->eval_node<double>(id, {});
      nodes[static_cast<std::size_t>(id)] = Node{};
      nodes[static_cast<std::size_t>(id)].value = v;
    }
    return id;
  }
  int binary(Op op, int a, int b) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    return push(n);
  }

  int sum() {
    int lhs = product();
    for (;;) {
      if (eat('+'))
        lhs = binary(Op::add, lhs, product());
      else if (eat('-'))
        lhs = binary(Op::sub, lhs, product());
      else
        return lhs;
    }
  }
  int product() {
    int lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = binary(Op::mul, lhs, unary());
      else if (eat('/'))
        lhs = binary(Op::div, lhs, unary());
      else
        return lhs;
    }
  }
  int unary() {
    if (eat('-')) return binary(Op::neg, unary(), -1);
    if (eat('+')) return unary();
    return power();
  }
  int power() {
    int base = atom();
    if (eat('^')) return binary(Op::pow, base, unary());
    return base;
  }
  int atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (eat('(')) {
      int inner = sum();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      Node n;
      n.value = v;
      return push(n);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (eat('(')) return call(name);
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) {
          Node n;
          n.op = Op::variable;
          n.index = i;
          return push(n);
        }
      Node n;
      if (auto it = consts_.find(name); it != consts_.end())
        n.value = it->second;
      else if (name == "pi")
        n.value = std::numbers::pi;
      else
        fail("unknown name '" + name + "'");
      return push(n);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
  int call(const std::string& name) {
    static const std::map<std::string, Fn> unary_fns = {{"sin", Fn::sin},   {"cos", Fn::cos},   {"tan", Fn::tan},
                                                        {"exp", Fn::exp},   {"log", Fn::log},   {"sqrt", Fn::sqrt},
                                                        {"atan", Fn::atan}, {"abs", Fn::abs}};
    int a = sum();
    Node n;
    n.a = a;
    if (name == "atan2") {
      if (!eat(',')) fail("atan2 takes two arguments");
      n.op = Op::call2;
      n.fn = Fn::atan2;
      n.b = sum();
    } else {
      auto it = unary_fns.find(name);
      if (it == unary_fns.end()) fail("unknown function '" + name + "'");
      n.op = Op::call1;
      n.fn = it->second;
    }
    if (!eat(')')) fail("missing ')' after arguments of " + name);
    return push(n);
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& consts_;
  std::size_t pos_ = 0;
  Expr* out_ = nullptr;
};

Expr Expr::parse(const std::string& text, const std::vector<std::string>& variables,
                 const std::map<std::string, double>& constants) {
  return ExprParser(text, variables, constants).run();
}

Field expr_field(std::vector<Expr> components, std::size_t in, Shape shape) {
  if (components.size() != shape.rows * shape.cols)
    throw DimensionError("expr_field: " + std::to_string(components.size()) + " expressions for a " +
                         std::to_string(shape.rows) + "x" + std::to_string(shape.cols) + " field");
  for (const Expr& e : components)
    if (e.arity() != in) throw DimensionError("expr_field: expression '" + e.text() + "' has the wrong arity");
  auto shared = std::make_shared<const std::vector<Expr>>(std::move(components));
  return Field::smooth(in, shape, [shared]<class T>(std::span<const T> x) {
    std::vector<T> out;
    out.reserve(shared->size());
    for (const Expr& e : *shared) out.push_back(e.eval<T>(x));
    return out;
  });
}

}  // namespace vhc
