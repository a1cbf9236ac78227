#ifndef LYAPFIX_EXPR_HPP
#define LYAPFIX_EXPR_HPP

// Closed-form interaction functions xi(t,u,v) parsed from text.
//
// Grammar (lowest to highest binding):
//
//   sum     := product  { ('+' | '-') product }
//   product := unary    { ('*' | '/') unary }
//   unary   := '-' unary | power
//   power   := primary  { '^' operand }
//   operand := '-' operand | primary
//   primary := number | variable | func '(' sum ')' | '(' sum ')'
//
// All binary operators are left-associative, so 2^3^2 == (2^3)^2.
// Numbers are decimal with an optional exponent; there is no implicit
// multiplication.  func is one of sin, cos, exp, abs, log.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lyapfix {

enum class Variable : std::uint8_t { t = 0, u = 1, v = 2 };

char variable_name(Variable var);

/// Small bitmask set over {t, u, v}.
class VarSet {
public:
  constexpr VarSet() = default;
  constexpr VarSet(std::initializer_list<Variable> vars) {
    for (Variable v : vars) bits_ |= bit(v);
  }

  constexpr bool contains(Variable v) const { return (bits_ & bit(v)) != 0; }
  constexpr void insert(Variable v) { bits_ |= bit(v); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const VarSet&) const = default;

  /// Members in canonical order t, u, v.
  std::vector<Variable> members() const;

private:
  static constexpr std::uint8_t bit(Variable v) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v));
  }
  std::uint8_t bits_ = 0;
};

class ExprError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Syntax error, unknown identifier or a variable outside the allowed set.
class ParseError : public ExprError {
public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Evaluation left the domain of an operator (x/0, 0^-1, log(-1), overflow).
class DomainError : public ExprError {
public:
  DomainError(const std::string& what, std::string subexpression);
  const std::string& subexpression() const { return subexpression_; }

private:
  std::string subexpression_;
};

/// Immutable parsed expression.  Evaluation is pure and may be called
/// concurrently.
class Expression {
public:
  enum class Op : std::uint8_t {
    constant,
    variable,
    neg,
    sin,
    cos,
    exp,
    abs,
    log,
    add,
    sub,
    mul,
    div,
    pow,
  };

  struct Node {
    Op op = Op::constant;
    double value = 0.0;
    Variable var = Variable::t;
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;
  };

  /// The constant-zero expression over no variables.
  Expression();

  static Expression parse(std::string_view source, VarSet allowed);

  /// Evaluate at a point whose coordinates follow variables() order.
  double evaluate(std::span<const double> point) const;

  /// Evaluate with every variable bound by name; unused bindings are ignored.
  double operator()(double t, double u, double v) const;

  /// Fully parenthesised text that re-parses to an identical tree.
  std::string to_string() const;

  /// Distinct variables that occur in the expression, canonical order.
  const std::vector<Variable>& variables() const { return variables_; }
  std::size_t arity() const { return variables_.size(); }
  VarSet allowed() const { return allowed_; }
  const std::string& source() const { return source_; }
  std::span<const Node> nodes() const { return nodes_; }

private:
  friend class ExpressionParser;

  double eval_node(std::int32_t index, const double (&binding)[3]) const;
  void print_node(std::int32_t index, std::string& out) const;
  std::string subtree_text(std::int32_t index) const;

  std::vector<Node> nodes_;
  std::int32_t root_ = 0;
  std::vector<Variable> variables_;
  VarSet allowed_;
  std::string source_;
};

/// Min and max of e over a uniform grid on [0,1]^arity that includes every
/// corner.  grid_per_axis must be at least 2.
std::pair<double, double> bound_estimate(const Expression& e, int grid_per_axis);

}  // namespace lyapfix

#endif  // LYAPFIX_EXPR_HPP
