#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace kuramoto {

// Value and first derivative with respect to theta, propagated together so a
// parsed initial profile yields its exact slope.
struct Dual {
  double value = 0.0;
  double slope = 0.0;
};

// A small arithmetic language over theta, omega and constants:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'theta' | 'omega' | 'pi' | fn '(' expr ')' | '(' expr ')'
//   fn      := sin | cos | exp | sqrt
//
// This covers every initial velocity used in the experiments, e.g.
// "-sin(theta)", "2*sin(2*theta)", "-0.5*sin(theta) + 0.1".
class Expression {
 public:
  struct Node;

  static Expression parse(std::string_view text);

  double operator()(double theta, double omega = 0.0) const;
  Dual eval(double theta, double omega = 0.0) const;

  const std::string& source() const noexcept { return source_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace kuramoto
