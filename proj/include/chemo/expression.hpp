#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace chemo {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Variables an expression may reference.
struct ExprVars {
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;
  double v = 0.0;
};

// Compiled scalar expression over (x, y, u, v).
//
// Grammar:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('-' | '+') unary | atom
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
//   ident  := x | y | u | v
//   func   := exp | sin | cos
//
// Instances are immutable after construction and safe to evaluate from
// several threads at once.
class Expression {
 public:
  explicit Expression(std::string source);

  double operator()(const ExprVars& vars) const;
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace chemo
