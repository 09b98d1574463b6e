#include "hjbpi/expression.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hjbpi {

struct Expression::Node {
  enum class Kind { Constant, Coordinate, Neg, Add, Sub, Mul, Div, Pow } kind;
  double value = 0.0;
  int index = 0;  // coordinate index or integer exponent
  std::shared_ptr<const Node> lhs, rhs;

  double eval(const Eigen::VectorXd& x) const {
    switch (kind) {
      case Kind::Constant: return value;
      case Kind::Coordinate: return x[index];
      case Kind::Neg: return -lhs->eval(x);
      case Kind::Add: return lhs->eval(x) + rhs->eval(x);
      case Kind::Sub: return lhs->eval(x) - rhs->eval(x);
      case Kind::Mul: return lhs->eval(x) * rhs->eval(x);
      case Kind::Div: return lhs->eval(x) / rhs->eval(x);
      case Kind::Pow: {
        const double b = lhs->eval(x);
        double r = 1.0;
        for (int i = 0; i < index; ++i) r *= b;
        return r;
      }
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

class Parser {
 public:
  Parser(std::string_view s, int dim, const std::map<std::string, double>& params)
      : s_(s), dim_(dim), params_(params) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression '" + std::string(s_) + "': " + what +
                                " at position " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = make(Kind::Add, n, term());
      else if (accept('-')) n = make(Kind::Sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    auto n = factor();
    for (;;) {
      if (accept('*')) n = make(Kind::Mul, n, factor());
      else if (accept('/')) n = make(Kind::Div, n, factor());
      else return n;
    }
  }

  NodePtr factor() {
    if (accept('-')) return make(Kind::Neg, factor());
    if (accept('+')) return factor();
    return power();
  }

  NodePtr power() {
    auto base = atom();
    if (!accept('^')) return base;
    skip();
    const auto start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be a non-negative integer");
    auto n = std::const_pointer_cast<Expression::Node>(make(Kind::Pow, base));
    n->index = std::stoi(std::string(s_.substr(start, pos_ - start)));
    return n;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto n = expr();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double v = std::stod(std::string(s_.substr(pos_)), &used);
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Constant;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const auto start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      auto n = std::make_shared<Expression::Node>();
      if (auto it = params_.find(name); it != params_.end()) {
        n->kind = Kind::Constant;
        n->value = it->second;
        return n;
      }
      if (name.size() > 1 && name[0] == 'x' &&
          name.find_first_not_of("0123456789", 1) == std::string::npos) {
        const int k = std::stoi(name.substr(1));
        if (k < 1 || k > dim_) fail("coordinate " + name + " out of range");
        n->kind = Kind::Coordinate;
        n->index = k - 1;
        return n;
      }
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected character");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int dim_;
  const std::map<std::string, double>& params_;
};

}  // namespace

Expression Expression::compile(std::string_view text, int dim,
                               const std::map<std::string, double>& params) {
  Expression e;
  e.root_ = Parser(text, dim, params).parse();
  e.text_ = std::string(text);
  return e;
}

double Expression::operator()(const Eigen::VectorXd& x) const {
  if (!root_) throw std::logic_error("expression: not compiled");
  return root_->eval(x);
}

}  // namespace hjbpi
