#include "kuramoto/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "kuramoto/error.hpp"

namespace kuramoto {

struct Expression::Node {
  enum class Kind { constant, theta, omega, add, sub, mul, div, pow, neg, sin, cos, exp, sqrt };
  Kind kind = Kind::constant;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make_leaf(Kind kind, double value = 0.0) {
  auto node = std::make_shared<Expression::Node>();
  node->kind = kind;
  node->value = value;
  return node;
}

NodePtr make_node(Kind kind, NodePtr lhs, NodePtr rhs = nullptr) {
  auto node = std::make_shared<Expression::Node>();
  node->kind = kind;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return node;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    NodePtr node = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expression '" + std::string(text_) + "': " + what + " at offset " +
                     std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Kind::add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = make_node(Kind::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Kind::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_node(Kind::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_node(Kind::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_node(Kind::pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string_view word = text_.substr(start, pos_ - start);
      if (word == "theta") return make_leaf(Kind::theta);
      if (word == "omega") return make_leaf(Kind::omega);
      if (word == "pi") return make_leaf(Kind::constant, std::numbers::pi);
      Kind fn;
      if (word == "sin") {
        fn = Kind::sin;
      } else if (word == "cos") {
        fn = Kind::cos;
      } else if (word == "exp") {
        fn = Kind::exp;
      } else if (word == "sqrt") {
        fn = Kind::sqrt;
      } else {
        pos_ = start;
        fail("unknown identifier '" + std::string(word) + "'");
      }
      if (!accept('(')) fail("expected '(' after function name");
      NodePtr arg = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return make_node(fn, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const std::string rest(text_.substr(pos_));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    return make_leaf(Kind::constant, value);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Dual evaluate(const Expression::Node& node, double theta, double omega) {
  switch (node.kind) {
    case Kind::constant:
      return {node.value, 0.0};
    case Kind::theta:
      return {theta, 1.0};
    case Kind::omega:
      return {omega, 0.0};
    case Kind::neg: {
      const Dual a = evaluate(*node.lhs, theta, omega);
      return {-a.value, -a.slope};
    }
    case Kind::sin: {
      const Dual a = evaluate(*node.lhs, theta, omega);
      return {std::sin(a.value), std::cos(a.value) * a.slope};
    }
    case Kind::cos: {
      const Dual a = evaluate(*node.lhs, theta, omega);
      return {std::cos(a.value), -std::sin(a.value) * a.slope};
    }
    case Kind::exp: {
      const Dual a = evaluate(*node.lhs, theta, omega);
      const double e = std::exp(a.value);
      return {e, e * a.slope};
    }
    case Kind::sqrt: {
      const Dual a = evaluate(*node.lhs, theta, omega);
      const double s = std::sqrt(a.value);
      return {s, a.slope == 0.0 ? 0.0 : 0.5 * a.slope / s};
    }
    default:
      break;
  }
  const Dual a = evaluate(*node.lhs, theta, omega);
  const Dual b = evaluate(*node.rhs, theta, omega);
  switch (node.kind) {
    case Kind::add:
      return {a.value + b.value, a.slope + b.slope};
    case Kind::sub:
      return {a.value - b.value, a.slope - b.slope};
    case Kind::mul:
      return {a.value * b.value, a.slope * b.value + a.value * b.slope};
    case Kind::div:
      return {a.value / b.value, (a.slope * b.value - a.value * b.slope) / (b.value * b.value)};
    case Kind::pow: {
      const double p = std::pow(a.value, b.value);
      double slope = 0.0;
      if (b.slope == 0.0) {
        if (a.slope != 0.0) slope = b.value * std::pow(a.value, b.value - 1.0) * a.slope;
      } else {
        slope = p * (b.slope * std::log(a.value) + b.value * a.slope / a.value);
      }
      return {p, slope};
    }
    default:
      return {};
  }
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression expr;
  expr.root_ = Parser(text).parse_all();
  expr.source_ = std::string(text);
  return expr;
}

double Expression::operator()(double theta, double omega) const { return eval(theta, omega).value; }

Dual Expression::eval(double theta, double omega) const {
  if (!root_) throw ParseError("empty expression");
  return evaluate(*root_, theta, omega);
}

}  // namespace kuramoto
