#include "partlag/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>

namespace partlag::expr {

const char* func_name(Func f) {
  switch (f) {
    case Func::Sqrt: return "sqrt";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Abs: return "abs";
  }
  return "?";
}

namespace {

bool lookup_func(std::string_view name, Func& out) {
  static const std::pair<std::string_view, Func> table[] = {
      {"sqrt", Func::Sqrt}, {"exp", Func::Exp}, {"log", Func::Log},
      {"sin", Func::Sin},   {"cos", Func::Cos}, {"abs", Func::Abs},
  };
  for (const auto& [n, f] : table) {
    if (n == name) {
      out = f;
      return true;
    }
  }
  return false;
}

struct Token {
  enum class Kind { End, Number, Name, Op, LParen, RParen };
  Kind kind = Kind::End;
  double number = 0.0;
  std::string text;
  char op = 0;
  std::size_t offset = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  NodePtr parse() {
    if (tok_.kind == Token::Kind::End) throw ParseError(0, "empty expression");
    NodePtr e = parse_expr();
    if (tok_.kind != Token::Kind::End) {
      throw ParseError(tok_.offset, "unexpected '" + describe(tok_) + "'");
    }
    return e;
  }

 private:
  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Token::Kind::End: return "end of input";
      case Token::Kind::Number: return "number";
      case Token::Kind::Name: return t.text;
      case Token::Kind::Op: return std::string(1, t.op);
      case Token::Kind::LParen: return "(";
      case Token::Kind::RParen: return ")";
    }
    return "?";
  }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) return;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) {
        ++end;
      }
      if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
        std::size_t k = end + 1;
        if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
        if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
          while (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) ++k;
          end = k;
        }
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + end, v);
      if (ec != std::errc() || ptr != src_.data() + end) {
        throw ParseError(pos_, "malformed number");
      }
      tok_.kind = Token::Kind::Number;
      tok_.number = v;
      pos_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
        ++end;
      }
      tok_.kind = Token::Kind::Name;
      tok_.text = std::string(src_.substr(pos_, end - pos_));
      pos_ = end;
      return;
    }
    switch (c) {
      case '+':
      case '-':
      case '*':
      case '/':
      case '^':
        tok_.kind = Token::Kind::Op;
        tok_.op = c;
        break;
      case '(': tok_.kind = Token::Kind::LParen; break;
      case ')': tok_.kind = Token::Kind::RParen; break;
      default: throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }
    ++pos_;
  }

  bool at_op(char op) const { return tok_.kind == Token::Kind::Op && tok_.op == op; }

  static NodePtr binary(char op, NodePtr l, NodePtr r, std::size_t offset) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    n->offset = offset;
    return n;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (at_op('+') || at_op('-')) {
      const char op = tok_.op;
      const std::size_t off = tok_.offset;
      advance();
      lhs = binary(op, lhs, parse_term(), off);
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (at_op('*') || at_op('/')) {
      const char op = tok_.op;
      const std::size_t off = tok_.offset;
      advance();
      lhs = binary(op, lhs, parse_unary(), off);
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (at_op('-')) {
      const std::size_t off = tok_.offset;
      advance();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Negate;
      n->lhs = parse_unary();
      n->offset = off;
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (at_op('^')) {
      const std::size_t off = tok_.offset;
      advance();
      return binary('^', base, parse_unary(), off);
    }
    return base;
  }

  NodePtr parse_primary() {
    const Token t = tok_;
    switch (t.kind) {
      case Token::Kind::Number: {
        advance();
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Number;
        n->number = t.number;
        n->offset = t.offset;
        return n;
      }
      case Token::Kind::Name: {
        advance();
        Func f;
        if (tok_.kind == Token::Kind::LParen) {
          if (!lookup_func(t.text, f)) throw ParseError(t.offset, "unknown function '" + t.text + "'");
          advance();
          NodePtr arg = parse_expr();
          expect_rparen(t.offset);
          auto n = std::make_shared<Node>();
          n->kind = Node::Kind::Call;
          n->func = f;
          n->lhs = std::move(arg);
          n->offset = t.offset;
          return n;
        }
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Variable;
        n->name = t.text;
        n->offset = t.offset;
        return n;
      }
      case Token::Kind::LParen: {
        advance();
        NodePtr inner = parse_expr();
        expect_rparen(t.offset);
        return inner;
      }
      case Token::Kind::End: throw ParseError(t.offset, "unexpected end of input");
      default: throw ParseError(t.offset, "unexpected '" + describe(t) + "'");
    }
  }

  void expect_rparen(std::size_t open_offset) {
    if (tok_.kind != Token::Kind::RParen) {
      throw ParseError(tok_.kind == Token::Kind::End ? open_offset : tok_.offset,
                       "unbalanced parenthesis");
    }
    advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

std::string render_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void render(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Number: out += render_number(n.number); break;
    case Node::Kind::Variable: out += n.name; break;
    case Node::Kind::Negate:
      out += "(-";
      render(*n.lhs, out);
      out += ")";
      break;
    case Node::Kind::Call:
      out += func_name(n.func);
      out += "(";
      render(*n.lhs, out);
      out += ")";
      break;
    case Node::Kind::Binary:
      out += "(";
      render(*n.lhs, out);
      out += ' ';
      out += n.op;
      out += ' ';
      render(*n.rhs, out);
      out += ")";
      break;
  }
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Node::Kind::Number: return a.number == b.number;
    case Node::Kind::Variable: return a.name == b.name;
    case Node::Kind::Negate: return equal_nodes(*a.lhs, *b.lhs);
    case Node::Kind::Call: return a.func == b.func && equal_nodes(*a.lhs, *b.lhs);
    case Node::Kind::Binary:
      return a.op == b.op && equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
  }
  return false;
}

void collect_names(const Node& n, std::set<std::string>& out) {
  if (n.kind == Node::Kind::Variable) out.insert(n.name);
  if (n.lhs) collect_names(*n.lhs, out);
  if (n.rhs) collect_names(*n.rhs, out);
}

NodePtr rename_node(const NodePtr& n, const std::map<std::string, std::string>& mapping) {
  if (n->kind == Node::Kind::Variable) {
    auto it = mapping.find(n->name);
    if (it == mapping.end()) return n;
    auto copy = std::make_shared<Node>(*n);
    copy->name = it->second;
    return copy;
  }
  if (!n->lhs) return n;
  auto copy = std::make_shared<Node>(*n);
  copy->lhs = rename_node(n->lhs, mapping);
  if (n->rhs) copy->rhs = rename_node(n->rhs, mapping);
  return copy;
}

}  // namespace

Expr Expr::parse(std::string_view source) { return Expr(Parser(source).parse()); }

Expr Expr::number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->number = v;
  return Expr(n);
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Variable;
  n->name = std::move(name);
  return Expr(n);
}

std::string Expr::str() const {
  std::string out;
  if (root_) render(*root_, out);
  return out;
}

bool Expr::structurally_equal(const Expr& other) const {
  if (!root_ || !other.root_) return !root_ && !other.root_;
  return equal_nodes(*root_, *other.root_);
}

std::set<std::string> Expr::free_names() const {
  std::set<std::string> out;
  if (root_) collect_names(*root_, out);
  return out;
}

Expr Expr::rename(const std::map<std::string, std::string>& mapping) const {
  if (!root_) return *this;
  return Expr(rename_node(root_, mapping));
}

// ---- compilation ----------------------------------------------------------

struct ProgramBuilder {
  Program& prog;
  std::span<const std::string> slots;
  const std::map<std::string, double>& params;
  std::size_t depth = 0;
  std::size_t max_depth = 0;

  void push(const Program::Instr& in, int delta) {
    prog.code_.push_back(in);
    depth = static_cast<std::size_t>(static_cast<long>(depth) + delta);
    max_depth = std::max(max_depth, depth);
  }

  // Constant subtree value, if the subtree mentions no slot variables.
  bool fold(const Node& n, double& out) const {
    switch (n.kind) {
      case Node::Kind::Number: out = n.number; return true;
      case Node::Kind::Variable: {
        for (const auto& s : slots) {
          if (s == n.name) return false;
        }
        auto it = params.find(n.name);
        if (it == params.end()) throw UnboundName(n.name);
        out = it->second;
        return true;
      }
      case Node::Kind::Negate: {
        double a;
        if (!fold(*n.lhs, a)) return false;
        out = -a;
        return true;
      }
      case Node::Kind::Call: {
        double a;
        if (!fold(*n.lhs, a)) return false;
        out = apply_func(n.func, a);
        return true;
      }
      case Node::Kind::Binary: {
        double a, b;
        const bool fa = fold(*n.lhs, a);
        const bool fb = fold(*n.rhs, b);
        if (!fa || !fb) return false;
        out = apply_binary(n.op, a, b);
        return true;
      }
    }
    return false;
  }

  void emit(const Node& n) {
    double c;
    if (fold(n, c)) {
      Program::Instr in;
      in.op = Program::Op::Const;
      in.value = c;
      push(in, +1);
      return;
    }
    switch (n.kind) {
      case Node::Kind::Number: break;  // folded above
      case Node::Kind::Variable: {
        Program::Instr in;
        in.op = Program::Op::Var;
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (slots[i] == n.name) in.slot = i;
        }
        push(in, +1);
        break;
      }
      case Node::Kind::Negate: {
        emit(*n.lhs);
        Program::Instr in;
        in.op = Program::Op::Neg;
        push(in, 0);
        break;
      }
      case Node::Kind::Call: {
        emit(*n.lhs);
        Program::Instr in;
        in.op = Program::Op::Call;
        in.func = n.func;
        push(in, 0);
        break;
      }
      case Node::Kind::Binary: {
        double e;
        if (n.op == '^' && fold(*n.rhs, e) && std::nearbyint(e) == e && std::fabs(e) <= 1024.0) {
          emit(*n.lhs);
          Program::Instr in;
          in.op = Program::Op::IPow;
          in.ipow = static_cast<long>(e);
          push(in, 0);
          break;
        }
        emit(*n.lhs);
        emit(*n.rhs);
        Program::Instr in;
        in.op = Program::Op::Binary;
        in.bin = n.op;
        push(in, -1);
        break;
      }
    }
  }
};

Program Program::compile(const Expr& e, std::span<const std::string> slots,
                         const std::map<std::string, double>& parameters) {
  if (e.empty()) throw std::invalid_argument("compile of empty expression");
  Program p;
  p.arity_ = slots.size();
  p.source_ = e.str();
  ProgramBuilder b{p, slots, parameters};
  try {
    b.emit(*e.root());
  } catch (const DomainError& err) {
    throw err.with_context("in '" + p.source_ + "'");
  }
  p.depth_ = b.max_depth;
  return p;
}

std::vector<std::string> indexed_names(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace partlag::expr
