#pragma once

// Arithmetic expressions over named coordinates, compiled into Fields that evaluate at every
// dual depth. Grammar:
//   expr  := term (('+' | '-') term)*
//   term  := unary (('*' | '/') unary)*
//   unary := ('+' | '-') unary | power
//   power := atom ('^' unary)?
//   atom  := number | name | name '(' expr ')' | '(' expr ')'
// Names are the declared variables and the constants pi and e; functions are
// sin, cos, tan, exp, log, sqrt, atan. An integer literal exponent uses repeated products.

#include <cds/field.hpp>

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cds {

class ExprError : public std::invalid_argument {
 public:
  ExprError(const std::string& text, std::size_t pos, const std::string& what)
      : std::invalid_argument("expression '" + text + "', column " + std::to_string(pos + 1) + ": " + what) {}
};

namespace expr {

enum class Op { constant, variable, add, sub, mul, div, neg, ipow, pow, call };
enum class Fn { sin, cos, tan, exp, log, sqrt, atan };

struct Node {
  Op op = Op::constant;
  double value = 0.0;
  int index = 0;  // variable index, or integer exponent for ipow
  Fn fn = Fn::sin;
  std::shared_ptr<const Node> a, b;
};
using NodePtr = std::shared_ptr<const Node>;

template <class S>
S eval(const Node& n, const S* x) {
  using std::atan, std::cos, std::exp, std::log, std::sin, std::sqrt, std::tan;
  switch (n.op) {
    case Op::constant: return S(n.value);
    case Op::variable: return x[n.index];
    case Op::add: return eval(*n.a, x) + eval(*n.b, x);
    case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
    case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::div: return eval(*n.a, x) / eval(*n.b, x);
    case Op::neg: return -eval(*n.a, x);
    case Op::ipow: {
      const S base = eval(*n.a, x);
      S r(1.0);
      for (int k = 0; k < std::abs(n.index); ++k) r = r * base;
      return n.index < 0 ? S(1.0) / r : r;
    }
    case Op::pow: return exp(eval(*n.b, x) * log(eval(*n.a, x)));
    case Op::call: {
      const S v = eval(*n.a, x);
      switch (n.fn) {
        case Fn::sin: return sin(v);
        case Fn::cos: return cos(v);
        case Fn::tan: return tan(v);
        case Fn::exp: return exp(v);
        case Fn::log: return log(v);
        case Fn::sqrt: return sqrt(v);
        case Fn::atan: return atan(v);
      }
    }
  }
  throw std::logic_error("expr: unhandled node");
}

class Parser {
 public:
  Parser(std::string text, const std::vector<std::string>& vars) : s_(std::move(text)), vars_(vars) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (p_ != s_.size()) fail("unexpected '" + std::string(1, s_[p_]) + "'");
    return n;
  }

 private:
  std::string s_;
  const std::vector<std::string>& vars_;
  std::size_t p_ = 0;

  [[noreturn]] void fail(const std::string& what) const { throw ExprError(s_, p_, what); }

  void skip() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  bool accept(char c) {
    skip();
    if (p_ < s_.size() && s_[p_] == c) {
      ++p_;
      return true;
    }
    return false;
  }
  static NodePtr binary(Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
  static NodePtr constant(double v) {
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = binary(Op::add, n, term());
      else if (accept('-')) n = binary(Op::sub, n, term());
      else return n;
    }
  }
  NodePtr term() {
    auto n = unary();
    for (;;) {
      if (accept('*')) n = binary(Op::mul, n, unary());
      else if (accept('/')) n = binary(Op::div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) return binary(Op::neg, unary(), nullptr);
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    auto base = atom();
    if (!accept('^')) return base;
    auto ex = unary();
    const Node& e = *ex;
    const bool literal = e.op == Op::constant || (e.op == Op::neg && e.a->op == Op::constant);
    const double v = e.op == Op::constant ? e.value : (literal ? -e.a->value : 0.0);
    if (literal && v == std::round(v) && std::abs(v) <= 64) {
      auto n = std::make_shared<Node>();
      n->op = Op::ipow;
      n->index = static_cast<int>(v);
      n->a = base;
      return n;
    }
    return binary(Op::pow, base, ex);
  }
  NodePtr atom() {
    skip();
    if (p_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[p_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(p_), &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      p_ += used;
      return constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = p_;
      while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_')) ++p_;
      const std::string name = s_.substr(start, p_ - start);
      skip();
      if (p_ < s_.size() && s_[p_] == '(') {
        static const std::pair<const char*, Fn> fns[] = {{"sin", Fn::sin}, {"cos", Fn::cos},   {"tan", Fn::tan},
                                                         {"exp", Fn::exp}, {"log", Fn::log},   {"sqrt", Fn::sqrt},
                                                         {"atan", Fn::atan}};
        for (const auto& [fname, fn] : fns)
          if (name == fname) {
            ++p_;
            auto n = std::make_shared<Node>();
            n->op = Op::call;
            n->fn = fn;
            n->a = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
          }
        p_ = start;
        fail("unknown function '" + name + "'");
      }
      for (std::size_t k = 0; k < vars_.size(); ++k)
        if (vars_[k] == name) {
          auto n = std::make_shared<Node>();
          n->op = Op::variable;
          n->index = static_cast<int>(k);
          return n;
        }
      if (name == "pi") return constant(std::acos(-1.0));
      if (name == "e") return constant(std::exp(1.0));
      p_ = start;
      fail("unknown name '" + name + "'");
    }
    if (accept('(')) {
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace expr

inline expr::NodePtr parse_expression(const std::string& text, const std::vector<std::string>& vars) {
  return expr::Parser(text, vars).parse();
}

// Field whose components are the given expressions in the variables `vars` (in coordinate order).
inline Field compile_field(const std::vector<std::string>& components, const std::vector<std::string>& vars,
                           Valence valence = Valence::scalar, int degree = 0) {
  std::vector<expr::NodePtr> nodes;
  for (const auto& c : components) nodes.push_back(parse_expression(c, vars));
  return Field::make(static_cast<int>(vars.size()), static_cast<int>(nodes.size()), valence, degree,
                     [nodes](const auto* x, auto* out) {
                       for (std::size_t c = 0; c < nodes.size(); ++c) out[c] = expr::eval(*nodes[c], x);
                     });
}

// Coordinate names prefix0, prefix1, ...
inline std::vector<std::string> coordinate_names(const std::string& prefix, int count) {
  std::vector<std::string> v;
  for (int i = 0; i < count; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

}  // namespace cds
