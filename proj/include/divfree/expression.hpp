#pragma once

// Expression-string Lagrangians. Coefficients are named A<indices>, e.g. A01
// or A_0_1 (any order of the indices; the parity sign is applied), the entropy
// is s. Supported: + - * / ^, parentheses, numbers, pi, and the functions
// sqrt exp log sin cos tan tanh atan abs.

#include "divfree/lagrangian.hpp"

#include <cctype>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

namespace divfree {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Expression {
 public:
  Expression(std::string text, int d, int p) : text_(std::move(text)), d_(d), p_(p) {
    form_basis(d, p);
    root_ = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
  }

  const std::string& text() const { return text_; }
  bool uses_entropy() const { return uses_entropy_; }

  template <class T>
  T eval(std::span<const T> a, T s) const {
    return eval_node<T>(root_, a, s);
  }

 private:
  enum class Op { Num, Coeff, Entropy, Add, Sub, Mul, Div, Pow, Neg, Func };
  enum class Fn { Sqrt, Exp, Log, Sin, Cos, Tan, Tanh, Atan, Abs };

  struct Node {
    Op op = Op::Num;
    double value = 0.0;
    int slot = 0;
    int sign = 1;
    Fn fn = Fn::Sqrt;
    int lhs = -1;
    int rhs = -1;
  };

  template <class T>
  T eval_node(int id, std::span<const T> a, const T& s) const {
    using std::abs, std::atan, std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt, std::tan, std::tanh;
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    switch (n.op) {
      case Op::Num:
        return T(n.value);
      case Op::Coeff:
        return n.sign > 0 ? a[static_cast<std::size_t>(n.slot)] : T(-a[static_cast<std::size_t>(n.slot)]);
      case Op::Entropy:
        return s;
      case Op::Add:
        return eval_node<T>(n.lhs, a, s) + eval_node<T>(n.rhs, a, s);
      case Op::Sub:
        return eval_node<T>(n.lhs, a, s) - eval_node<T>(n.rhs, a, s);
      case Op::Mul:
        return eval_node<T>(n.lhs, a, s) * eval_node<T>(n.rhs, a, s);
      case Op::Div:
        return eval_node<T>(n.lhs, a, s) / eval_node<T>(n.rhs, a, s);
      case Op::Neg:
        return -eval_node<T>(n.lhs, a, s);
      case Op::Pow: {
        const Node& e = nodes_[static_cast<std::size_t>(n.rhs)];
        if (e.op == Op::Num) return pow(eval_node<T>(n.lhs, a, s), e.value);
        return pow(eval_node<T>(n.lhs, a, s), eval_node<T>(n.rhs, a, s));
      }
      case Op::Func: {
        const T x = eval_node<T>(n.lhs, a, s);
        switch (n.fn) {
          case Fn::Sqrt: return sqrt(x);
          case Fn::Exp: return exp(x);
          case Fn::Log: return log(x);
          case Fn::Sin: return sin(x);
          case Fn::Cos: return cos(x);
          case Fn::Tan: return tan(x);
          case Fn::Tanh: return tanh(x);
          case Fn::Atan: return atan(x);
          case Fn::Abs: return abs(x);
        }
      }
    }
    return T(0.0);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression '" + text_ + "' at offset " + std::to_string(pos_) + ": " + what);
  }

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }
  int binary(Op op, int l, int r) {
    Node n;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    return add(n);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int parse_expr() {
    int l = parse_term();
    while (true) {
      if (accept('+')) l = binary(Op::Add, l, parse_term());
      else if (accept('-')) l = binary(Op::Sub, l, parse_term());
      else return l;
    }
  }
  int parse_term() {
    int l = parse_unary();
    while (true) {
      if (accept('*')) l = binary(Op::Mul, l, parse_unary());
      else if (accept('/')) l = binary(Op::Div, l, parse_unary());
      else return l;
    }
  }
  int parse_unary() {
    if (accept('-')) {
      Node n;
      n.op = Op::Neg;
      n.lhs = parse_unary();
      return add(n);
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }
  int parse_power() {
    const int base = parse_primary();
    if (accept('^')) return binary(Op::Pow, base, parse_unary());
    return base;
  }
  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int e = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(text_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      Node n;
      n.value = v;
      return add(n);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string id = text_.substr(start, pos_ - start);
      return parse_identifier(id);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  int parse_identifier(const std::string& id) {
    static const std::pair<const char*, Fn> fns[] = {{"sqrt", Fn::Sqrt}, {"exp", Fn::Exp},   {"log", Fn::Log},
                                                     {"sin", Fn::Sin},   {"cos", Fn::Cos},   {"tan", Fn::Tan},
                                                     {"tanh", Fn::Tanh}, {"atan", Fn::Atan}, {"abs", Fn::Abs}};
    for (const auto& [nm, fn] : fns) {
      if (id == nm) {
        if (!accept('(')) fail("expected '(' after " + id);
        Node n;
        n.op = Op::Func;
        n.fn = fn;
        n.lhs = parse_expr();
        if (!accept(')')) fail("expected ')'");
        return add(n);
      }
    }
    if (id == "pi") {
      Node n;
      n.value = std::numbers::pi;
      return add(n);
    }
    if (id == "s") {
      uses_entropy_ = true;
      Node n;
      n.op = Op::Entropy;
      return add(n);
    }
    if (id.size() > 1 && id[0] == 'A') {
      std::vector<int> raw;
      for (std::size_t k = 1; k < id.size(); ++k) {
        if (id[k] == '_') continue;
        if (!std::isdigit(static_cast<unsigned char>(id[k]))) fail("bad coefficient name " + id);
        raw.push_back(id[k] - '0');
      }
      if (static_cast<int>(raw.size()) != p_) fail("coefficient " + id + " has the wrong degree");
      Canonical c;
      try {
        c = canonicalize(raw, d_);
      } catch (const std::out_of_range&) {
        fail("coefficient " + id + " has an index out of range");
      }
      if (c.parity == 0) fail("coefficient " + id + " repeats an index");
      Node n;
      n.op = Op::Coeff;
      n.slot = form_basis(d_, p_).position(c.index);
      n.sign = c.parity;
      return add(n);
    }
    if (p_ == 0 && id == "A") fail("0-forms have no coefficient names");
    fail("unknown identifier " + id);
  }

  std::string text_;
  int d_;
  int p_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
  int root_ = -1;
  bool uses_entropy_ = false;
};

/// User-supplied density; gradients come from AD only.
inline LagrangianModel model_expression(const std::string& text, int d, int p, std::string name = "user-expr") {
  auto expr = std::make_shared<const Expression>(text, d, p);
  auto fn = [expr](auto a, auto s) {
    using T = std::remove_cvref_t<decltype(s)>;
    return expr->eval<T>(a, s);
  };
  return make_lagrangian(std::move(name), d, p, fn, expr->uses_entropy());
}

}  // namespace divfree
