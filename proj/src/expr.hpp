#pragma once

// Scalar expression language used for time-dependent matrix entries and
// nonlinear terms: literals, pi/e, symbols (t, x1..xn, named parameters),
// sin cos tan sec exp log sqrt abs, + - * / ^ and unary minus.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "error.hpp"

namespace fg {

enum class Function { Sin, Cos, Tan, Sec, Exp, Log, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class NamedConstant { Pi, E };

std::string_view function_name(Function f);
std::optional<Function> function_from_name(std::string_view name);

using ParamMap = std::map<std::string, double, std::less<>>;

class Expression;

namespace ast {
struct Number {
  double value;
};
struct Constant {
  NamedConstant which;
};
struct Symbol {
  enum class Kind { Time, State, Param };
  std::string name;
  Kind kind;
  std::size_t state_index;  // zero-based, meaningful for Kind::State
};
struct Apply;
struct Binary;
struct Negate;
}  // namespace ast

/// Immutable expression tree. Copies share structure; safe to evaluate
/// concurrently from several threads.
class Expression {
 public:
  using Node = std::variant<ast::Number, ast::Constant, ast::Symbol, ast::Apply, ast::Binary, ast::Negate>;

  Expression();  // literal 0
  explicit Expression(Node node);

  static Expression number(double v);
  static Expression constant(NamedConstant c);
  static Expression symbol(std::string name);
  static Expression apply(Function f, Expression arg);
  static Expression binary(BinaryOp op, Expression lhs, Expression rhs);
  static Expression negate(Expression arg);

  const Node& node() const;

  bool is_number() const;
  /// True when the node is a numeric literal equal to v.
  bool is_number(double v) const;
  std::optional<double> as_number() const;

 private:
  std::shared_ptr<const Node> node_;
};

namespace ast {
struct Apply {
  Function fn;
  Expression arg;
};
struct Binary {
  BinaryOp op;
  Expression lhs;
  Expression rhs;
};
struct Negate {
  Expression arg;
};
}  // namespace ast

inline const Expression::Node& Expression::node() const { return *node_; }

/// Values bound for evaluation. Every free symbol must be bound; `t` is
/// bound only when `time` is set.
struct Environment {
  std::optional<double> time;
  std::span<const double> state;
  const ParamMap* params = nullptr;
};

Expression parse(std::string_view source);
double eval(const Expression& e, const Environment& env);
double eval_at(const Expression& e, double t);
Expression differentiate(const Expression& e, std::string_view symbol);

/// Replaces parameter symbols that appear in `params` with literals.
Expression bind(const Expression& e, const ParamMap& params);

std::string to_string(const Expression& e);
bool structurally_equal(const Expression& a, const Expression& b);
std::set<std::string> free_symbols(const Expression& e);
bool depends_on(const Expression& e, std::string_view symbol);

// Builders with literal constant folding.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& base, const Expression& exponent);
Expression apply(Function f, const Expression& arg);

}  // namespace fg
