#pragma once

#include <Eigen/Core>

#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace hjbpi {

/// Compiled scalar expression over state coordinates x1..xd and named
/// parameters. Grammar:
///
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | '/') factor)*
///   factor := ('+' | '-') factor | power
///   power  := atom ('^' integer)?
///   atom   := number | identifier | '(' expr ')'
///
/// Identifiers x1..xd refer to state coordinates (1-based); anything else
/// must be a parameter. Parameters are bound at compile time.
class Expression {
 public:
  struct Node;

  Expression() = default;
  static Expression compile(std::string_view text, int dim,
                            const std::map<std::string, double>& params);

  double operator()(const Eigen::VectorXd& x) const;
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace hjbpi
