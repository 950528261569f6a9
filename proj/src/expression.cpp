#include "chemo/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace chemo {

struct Expression::Node {
  enum class Kind { Number, Var, Neg, Add, Sub, Mul, Div, Exp, Sin, Cos };
  Kind kind = Kind::Number;
  double number = 0.0;
  char var = 0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("expression '" + src_ + "': " + what + " at offset " +
                          std::to_string(pos_));
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) {
        n = make(Node::Kind::Add, n, term());
      } else if (accept('-')) {
        n = make(Node::Kind::Sub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) {
        n = make(Node::Kind::Mul, n, unary());
      } else if (accept('/')) {
        n = make(Node::Kind::Div, n, unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Kind::Neg, unary());
    if (accept('+')) return unary();
    return atom();
  }

  NodePtr atom() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Number;
      n->number = value;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const std::string ident = src_.substr(start, pos_ - start);
      if (ident == "x" || ident == "y" || ident == "u" || ident == "v") {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Var;
        n->var = ident[0];
        return n;
      }
      Node::Kind fn;
      if (ident == "exp") {
        fn = Node::Kind::Exp;
      } else if (ident == "sin") {
        fn = Node::Kind::Sin;
      } else if (ident == "cos") {
        fn = Node::Kind::Cos;
      } else {
        pos_ = start;
        fail("unknown identifier '" + ident + "'");
      }
      if (!accept('(')) fail("expected '(' after " + ident);
      NodePtr arg = expr();
      if (!accept(')')) fail("expected ')'");
      return make(fn, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const ExprVars& vars) {
  switch (n.kind) {
    case Node::Kind::Number:
      return n.number;
    case Node::Kind::Var:
      switch (n.var) {
        case 'x':
          return vars.x;
        case 'y':
          return vars.y;
        case 'u':
          return vars.u;
        default:
          return vars.v;
      }
    case Node::Kind::Neg:
      return -eval(*n.lhs, vars);
    case Node::Kind::Add:
      return eval(*n.lhs, vars) + eval(*n.rhs, vars);
    case Node::Kind::Sub:
      return eval(*n.lhs, vars) - eval(*n.rhs, vars);
    case Node::Kind::Mul:
      return eval(*n.lhs, vars) * eval(*n.rhs, vars);
    case Node::Kind::Div:
      return eval(*n.lhs, vars) / eval(*n.rhs, vars);
    case Node::Kind::Exp:
      return std::exp(eval(*n.lhs, vars));
    case Node::Kind::Sin:
      return std::sin(eval(*n.lhs, vars));
    case Node::Kind::Cos:
      return std::cos(eval(*n.lhs, vars));
  }
  return 0.0;
}

}  // namespace

Expression::Expression(std::string source) : source_(std::move(source)) {
  root_ = Parser(source_).parse();
}

double Expression::operator()(const ExprVars& vars) const { return eval(*root_, vars); }

}  // namespace chemo
