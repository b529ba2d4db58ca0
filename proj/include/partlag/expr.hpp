#pragma once

// Scalar expression language for model files.
//
// Grammar (lowest to highest precedence):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Functions: sqrt exp log sin cos abs. No implicit multiplication.
// Evaluation is generic over the numeric type (double or any Dual level).

#include "partlag/autodiff.hpp"

#include <boost/container/small_vector.hpp>

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace partlag::expr {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + message),
        offset_(offset),
        message_(message) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t offset_;
  std::string message_;
};

class UnboundName : public std::runtime_error {
 public:
  explicit UnboundName(const std::string& name)
      : std::runtime_error("unbound name '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

enum class Func { Sqrt, Exp, Log, Sin, Cos, Abs };

const char* func_name(Func f);

struct Node {
  enum class Kind { Number, Variable, Negate, Binary, Call };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;  // Variable
  char op = 0;       // Binary: + - * / ^
  Func func = Func::Sqrt;
  std::shared_ptr<const Node> lhs;  // operand for Negate/Call
  std::shared_ptr<const Node> rhs;
  std::size_t offset = 0;
};

using NodePtr = std::shared_ptr<const Node>;

template <class T>
T apply_func(Func f, const T& x) {
  switch (f) {
    case Func::Sqrt: return ad::sqrt(x);
    case Func::Exp: return ad::exp(x);
    case Func::Log: return ad::log(x);
    case Func::Sin: return ad::sin(x);
    case Func::Cos: return ad::cos(x);
    case Func::Abs: return ad::abs(x);
  }
  return x;
}

template <class T>
T apply_binary(char op, const T& a, const T& b) {
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    case '/': return ad::div(a, b);
    case '^': return ad::pow(a, b);
  }
  throw std::logic_error("unknown operator");
}

/// Immutable parsed expression.
class Expr {
 public:
  Expr() = default;

  static Expr parse(std::string_view source);
  static Expr number(double v);
  static Expr variable(std::string name);

  const NodePtr& root() const noexcept { return root_; }
  bool empty() const noexcept { return !root_; }

  /// Fully parenthesized rendering; re-parsing yields the same tree.
  std::string str() const;

  bool structurally_equal(const Expr& other) const;
  std::set<std::string> free_names() const;
  /// Replace variable names according to `mapping`.
  Expr rename(const std::map<std::string, std::string>& mapping) const;

  template <class T>
  T eval(const std::map<std::string, T>& bindings) const {
    if (!root_) throw std::logic_error("eval of empty expression");
    try {
      return eval_node<T>(*root_, bindings);
    } catch (const DomainError& e) {
      throw e.with_context("in '" + str() + "'");
    }
  }

 private:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  template <class T>
  static T eval_node(const Node& n, const std::map<std::string, T>& b) {
    switch (n.kind) {
      case Node::Kind::Number: return T(n.number);
      case Node::Kind::Variable: {
        auto it = b.find(n.name);
        if (it == b.end()) throw UnboundName(n.name);
        return it->second;
      }
      case Node::Kind::Negate: return -eval_node<T>(*n.lhs, b);
      case Node::Kind::Call: return apply_func(n.func, eval_node<T>(*n.lhs, b));
      case Node::Kind::Binary:
        return apply_binary(n.op, eval_node<T>(*n.lhs, b), eval_node<T>(*n.rhs, b));
    }
    throw std::logic_error("bad node");
  }

  NodePtr root_;
};

/// Flat postfix program compiled from an Expr with variables resolved to slot
/// indices and parameters folded to constants. Immutable, shareable.
class Program {
 public:
  Program() = default;

  /// `slots` names the positional variables; `parameters` are bound constants.
  /// Any other free name raises UnboundName.
  static Program compile(const Expr& e, std::span<const std::string> slots,
                         const std::map<std::string, double>& parameters);

  std::size_t arity() const noexcept { return arity_; }
  const std::string& source() const noexcept { return source_; }
  bool valid() const noexcept { return !code_.empty(); }
  bool is_constant() const noexcept { return code_.size() == 1 && code_[0].op == Op::Const; }

  template <class T>
  T eval(std::span<const T> vars) const {
    boost::container::small_vector<T, 12> stack;
    stack.reserve(depth_);
    try {
      for (const Instr& in : code_) {
        switch (in.op) {
          case Op::Const: stack.emplace_back(in.value); break;
          case Op::Var: stack.push_back(vars[in.slot]); break;
          case Op::Neg: stack.back() = -stack.back(); break;
          case Op::Call: stack.back() = apply_func(in.func, stack.back()); break;
          case Op::IPow: stack.back() = ad::ipow(stack.back(), in.ipow); break;
          case Op::Binary: {
            T rhs = std::move(stack.back());
            stack.pop_back();
            stack.back() = apply_binary(in.bin, stack.back(), rhs);
            break;
          }
        }
      }
    } catch (const DomainError& e) {
      throw e.with_context("in '" + source_ + "'");
    }
    return std::move(stack.back());
  }

  double operator()(std::span<const double> vars) const { return eval<double>(vars); }

 private:
  enum class Op { Const, Var, Neg, Call, IPow, Binary };
  struct Instr {
    Op op = Op::Const;
    double value = 0.0;
    std::size_t slot = 0;
    Func func = Func::Sqrt;
    long ipow = 0;
    char bin = 0;
  };

  friend struct ProgramBuilder;

  std::vector<Instr> code_;
  std::size_t depth_ = 0;
  std::size_t arity_ = 0;
  std::string source_;
};

/// Positional names "x1".."xn" (or any prefix).
std::vector<std::string> indexed_names(const std::string& prefix, std::size_t count);

}  // namespace partlag::expr
