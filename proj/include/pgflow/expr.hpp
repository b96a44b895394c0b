#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pgflow/linalg.hpp"
#include "pgflow/problem.hpp"

/// Tiny arithmetic language over x1..xn with forward-mode differentiation.
namespace pgflow::expr {

enum class Op { add, sub, mul, div, pow };
enum class Func { sin, cos, exp, sqrt, abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
  double value;
};
struct Variable {
  Index index;  // 1-based
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  Op op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Func fn;
  NodePtr arg;
};

struct Node {
  std::variant<Constant, Variable, Negate, Binary, Call> data;
};

/// Immutable parsed expression over `arity` variables.
struct ExprAst {
  NodePtr root;
  Index arity = 0;
};

inline NodePtr constant(double v) { return std::make_shared<const Node>(Node{Constant{v}}); }
inline NodePtr variable(Index i) { return std::make_shared<const Node>(Node{Variable{i}}); }
inline NodePtr negate(NodePtr a) { return std::make_shared<const Node>(Node{Negate{std::move(a)}}); }
inline NodePtr binary(Op op, NodePtr a, NodePtr b) {
  return std::make_shared<const Node>(Node{Binary{op, std::move(a), std::move(b)}});
}
inline NodePtr call(Func fn, NodePtr a) {
  return std::make_shared<const Node>(Node{Call{fn, std::move(a)}});
}

inline const char* function_name(Func fn) {
  switch (fn) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::exp: return "exp";
    case Func::sqrt: return "sqrt";
    case Func::abs: return "abs";
  }
  return "?";
}

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, Index arity) : src_(src), arity_(arity) {}

  NodePtr parse() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) {
      throw SyntaxError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = binary(Op::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return negate(parse_unary());
    return parse_power();
  }

  // Right associative: the exponent is itself a unary expression.
  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return binary(Op::pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError("unexpected end of expression", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_sum();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      throw SyntaxError("malformed number", start);
    }
    return constant(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      static constexpr Func fns[] = {Func::sin, Func::cos, Func::exp, Func::sqrt, Func::abs};
      for (Func fn : fns) {
        if (name == function_name(fn)) {
          ++pos_;
          NodePtr arg = parse_sum();
          if (!accept(')')) throw SyntaxError("expected ')'", pos_);
          return call(fn, arg);
        }
      }
      throw UnknownFunction("unknown function '" + std::string(name) + "'", start);
    }
    if (name.size() >= 2 && name[0] == 'x') {
      Index idx = 0;
      const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size() && name[1] != '0') {
        if (idx >= 1 && idx <= arity_) return variable(idx);
      }
    }
    throw UnknownVariable("unknown variable '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  Index arity_;
  std::size_t pos_ = 0;
};

inline double finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteEvaluation(std::string("non-finite result in ") + what);
  return v;
}

inline double eval_node(const Node& node, const Vector& x) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x(n.index - 1);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval_node(*n.operand, x);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double a = eval_node(*n.lhs, x);
          const double b = eval_node(*n.rhs, x);
          switch (n.op) {
            case Op::add: return finite(a + b, "addition");
            case Op::sub: return finite(a - b, "subtraction");
            case Op::mul: return finite(a * b, "multiplication");
            case Op::div: return finite(a / b, "division");
            case Op::pow: return finite(std::pow(a, b), "power");
          }
          return 0.0;
        } else {
          const double a = eval_node(*n.arg, x);
          switch (n.fn) {
            case Func::sin: return std::sin(a);
            case Func::cos: return std::cos(a);
            case Func::exp: return finite(std::exp(a), "exp");
            case Func::sqrt: return finite(std::sqrt(a), "sqrt");
            case Func::abs: return std::abs(a);
          }
          return 0.0;
        }
      },
      node.data);
}

struct Dual {
  double value;
  Vector grad;
};

inline Dual diff_node(const Node& node, const Vector& x) {
  const Index n = x.size();
  return std::visit(
      [&](const auto& nd) -> Dual {
        using T = std::decay_t<decltype(nd)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return {nd.value, Vector::Zero(n)};
        } else if constexpr (std::is_same_v<T, Variable>) {
          return {x(nd.index - 1), Vector::Unit(n, nd.index - 1)};
        } else if constexpr (std::is_same_v<T, Negate>) {
          Dual a = diff_node(*nd.operand, x);
          return {-a.value, -a.grad};
        } else if constexpr (std::is_same_v<T, Binary>) {
          Dual a = diff_node(*nd.lhs, x);
          Dual b = diff_node(*nd.rhs, x);
          switch (nd.op) {
            case Op::add: return {finite(a.value + b.value, "addition"), a.grad + b.grad};
            case Op::sub: return {finite(a.value - b.value, "subtraction"), a.grad - b.grad};
            case Op::mul:
              return {finite(a.value * b.value, "multiplication"),
                      b.value * a.grad + a.value * b.grad};
            case Op::div: {
              const double q = finite(a.value / b.value, "division");
              return {q, (a.grad - q * b.grad) / b.value};
            }
            case Op::pow: {
              const double p = finite(std::pow(a.value, b.value), "power");
              Vector g = Vector::Zero(n);
              if (!a.grad.isZero(0.0)) g += b.value * std::pow(a.value, b.value - 1.0) * a.grad;
              if (!b.grad.isZero(0.0)) g += p * std::log(a.value) * b.grad;
              return {p, g};
            }
          }
          return {0.0, Vector::Zero(n)};
        } else {
          Dual a = diff_node(*nd.arg, x);
          switch (nd.fn) {
            case Func::sin: return {std::sin(a.value), std::cos(a.value) * a.grad};
            case Func::cos: return {std::cos(a.value), -std::sin(a.value) * a.grad};
            case Func::exp: {
              const double e = finite(std::exp(a.value), "exp");
              return {e, e * a.grad};
            }
            case Func::sqrt: {
              const double r = finite(std::sqrt(a.value), "sqrt");
              return {r, a.grad / (2.0 * r)};
            }
            case Func::abs: {
              const double sign = a.value > 0.0 ? 1.0 : (a.value < 0.0 ? -1.0 : 0.0);
              return {std::abs(a.value), sign * a.grad};
            }
          }
          return {0.0, Vector::Zero(n)};
        }
      },
      node.data);
}

enum Precedence { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

inline int precedence(const Node& node) {
  if (const auto* b = std::get_if<Binary>(&node.data)) {
    switch (b->op) {
      case Op::add:
      case Op::sub: return kSum;
      case Op::mul:
      case Op::div: return kProduct;
      case Op::pow: return kPower;
    }
  }
  if (std::holds_alternative<Negate>(node.data)) return kUnary;
  return kAtom;
}

inline void print_node(const Node& node, std::string& out);

inline void print_at(const Node& node, int min_prec, std::string& out) {
  if (precedence(node) < min_prec) {
    out += '(';
    print_node(node, out);
    out += ')';
  } else {
    print_node(node, out);
  }
}

inline void print_node(const Node& node, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Constant>) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.17g", n.value);
          out += buf;
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += 'x';
          out += std::to_string(n.index);
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          print_at(*n.operand, kUnary, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          switch (n.op) {
            case Op::add:
            case Op::sub:
              print_at(*n.lhs, kSum, out);
              out += n.op == Op::add ? " + " : " - ";
              print_at(*n.rhs, kProduct, out);
              break;
            case Op::mul:
            case Op::div:
              print_at(*n.lhs, kProduct, out);
              out += n.op == Op::mul ? " * " : " / ";
              print_at(*n.rhs, kUnary, out);
              break;
            case Op::pow:
              print_at(*n.lhs, kAtom, out);
              out += '^';
              print_at(*n.rhs, kUnary, out);
              break;
          }
        } else {
          out += function_name(n.fn);
          out += '(';
          print_node(*n.arg, out);
          out += ')';
        }
      },
      node.data);
}

}  // namespace detail

/**
 * Parse `src` over variables x1..x`arity`.
 *
 * Precedence from tightest: ^ (right associative), unary −, * and /, + and −.
 * Throws SyntaxError (with byte offset), UnknownVariable or UnknownFunction.
 */
inline ExprAst parse(std::string_view src, Index arity) {
  return {detail::Parser(src, arity).parse(), arity};
}

inline double eval(const ExprAst& e, const Vector& x) {
  if (x.size() != e.arity) throw DimensionMismatch("expr eval: wrong number of variables");
  return detail::eval_node(*e.root, x);
}

/// Exact partial derivatives; abs uses sign(0) = 0.
inline Vector gradient(const ExprAst& e, const Vector& x) {
  if (x.size() != e.arity) throw DimensionMismatch("expr gradient: wrong number of variables");
  detail::Dual d = detail::diff_node(*e.root, x);
  if (!d.grad.allFinite()) throw NonFiniteEvaluation("non-finite derivative");
  return d.grad;
}

/// Minimal-parenthesis rendering that parses back to the same tree.
inline std::string print(const ExprAst& e) {
  std::string out;
  detail::print_node(*e.root, out);
  return out;
}

inline bool structurally_equal(const Node& a, const Node& b) {
  if (a.data.index() != b.data.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.data);
        if constexpr (std::is_same_v<T, Constant>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x.index == y.index;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return structurally_equal(*x.operand, *y.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) &&
                 structurally_equal(*x.rhs, *y.rhs);
        } else {
          return x.fn == y.fn && structurally_equal(*x.arg, *y.arg);
        }
      },
      a.data);
}

inline bool structurally_equal(const ExprAst& a, const ExprAst& b) {
  return a.arity == b.arity && structurally_equal(*a.root, *b.root);
}

/// Problem whose objective and constraints are DSL expressions over x1..xn.
inline Problem make_problem(Index n, std::string_view objective,
                            const std::vector<std::string>& constraints) {
  ExprAst v = parse(objective, n);
  std::vector<ExprAst> cs;
  cs.reserve(constraints.size());
  for (const auto& src : constraints) cs.push_back(parse(src, n));

  Problem p;
  p.n = n;
  p.m = static_cast<Index>(cs.size());
  p.objective = [v](const Vector& x) { return eval(v, x); };
  p.objective_gradient = [v](const Vector& x) { return gradient(v, x); };
  p.constraints = [cs](const Vector& x) {
    Vector c(static_cast<Index>(cs.size()));
    for (std::size_t i = 0; i < cs.size(); ++i) c(static_cast<Index>(i)) = eval(cs[i], x);
    return c;
  };
  p.constraint_jacobian = [cs, n](const Vector& x) {
    Matrix J(n, static_cast<Index>(cs.size()));
    for (std::size_t i = 0; i < cs.size(); ++i) J.col(static_cast<Index>(i)) = gradient(cs[i], x);
    return J;
  };
  return p;
}

}  // namespace pgflow::expr
