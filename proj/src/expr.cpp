#include "lyapfix/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace lyapfix {

char variable_name(Variable var) {
  switch (var) {
    case Variable::t: return 't';
    case Variable::u: return 'u';
    case Variable::v: return 'v';
  }
  return '?';
}

std::vector<Variable> VarSet::members() const {
  std::vector<Variable> out;
  for (Variable v : {Variable::t, Variable::u, Variable::v})
    if (contains(v)) out.push_back(v);
  return out;
}

ParseError::ParseError(const std::string& what, std::size_t position)
    : ExprError(what + " at position " + std::to_string(position)), position_(position) {}

DomainError::DomainError(const std::string& what, std::string subexpression)
    : ExprError(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

namespace {

using Op = Expression::Op;

struct FunctionName {
  std::string_view name;
  Op op;
};

constexpr std::array<FunctionName, 5> kFunctions{{
    {"sin", Op::sin},
    {"cos", Op::cos},
    {"exp", Op::exp},
    {"abs", Op::abs},
    {"log", Op::log},
}};

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::pow: return "^";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::abs: return "abs";
    case Op::log: return "log";
    default: return "";
  }
}

bool is_binary(Op op) {
  return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div || op == Op::pow;
}

}  // namespace

class ExpressionParser {
public:
  ExpressionParser(std::string_view src, VarSet allowed) : src_(src), allowed_(allowed) {}

  Expression run() {
    Expression e;
    e.nodes_.clear();
    out_ = &e;
    skip_space();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    e.root_ = parse_sum();
    skip_space();
    if (pos_ < src_.size())
      throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    e.allowed_ = allowed_;
    e.variables_ = used_.members();
    e.source_ = std::string(src_);
    return e;
  }

private:
  std::int32_t push(Expression::Node node) {
    out_->nodes_.push_back(node);
    return static_cast<std::int32_t>(out_->nodes_.size() - 1);
  }

  std::int32_t binary(Op op, std::int32_t lhs, std::int32_t rhs) {
    Expression::Node n;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    return push(n);
  }

  std::int32_t unary(Op op, std::int32_t arg) {
    Expression::Node n;
    n.op = op;
    n.lhs = arg;
    return push(n);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size())
        throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  std::int32_t parse_sum() {
    std::int32_t lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = binary(Op::add, lhs, parse_product());
      else if (accept('-'))
        lhs = binary(Op::sub, lhs, parse_product());
      else
        return lhs;
    }
  }

  std::int32_t parse_product() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = binary(Op::mul, lhs, parse_unary());
      else if (accept('/'))
        lhs = binary(Op::div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  std::int32_t parse_unary() {
    if (accept('-')) return unary(Op::neg, parse_unary());
    return parse_power();
  }

  std::int32_t parse_power() {
    std::int32_t lhs = parse_primary();
    while (accept('^')) lhs = binary(Op::pow, lhs, parse_operand());
    return lhs;
  }

  std::int32_t parse_operand() {
    if (accept('-')) return unary(Op::neg, parse_operand());
    return parse_primary();
  }

  std::int32_t parse_primary() {
    skip_space();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      std::int32_t inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  std::int32_t parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", start);
    }
    double value = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
      throw ParseError("number out of range", start);
    Expression::Node n;
    n.op = Op::constant;
    n.value = value;
    return push(n);
  }

  std::int32_t parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    if (name.size() == 1 && (name[0] == 't' || name[0] == 'u' || name[0] == 'v')) {
      const Variable var = name[0] == 't' ? Variable::t : name[0] == 'u' ? Variable::u : Variable::v;
      if (!allowed_.contains(var))
        throw ParseError("variable '" + std::string(name) + "' is not allowed here", start);
      used_.insert(var);
      Expression::Node n;
      n.op = Op::variable;
      n.var = var;
      return push(n);
    }
    for (const auto& fn : kFunctions) {
      if (fn.name == name) {
        expect('(');
        std::int32_t arg = parse_sum();
        expect(')');
        return unary(fn.op, arg);
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  VarSet allowed_;
  VarSet used_;
  std::size_t pos_ = 0;
  Expression* out_ = nullptr;
};

Expression::Expression() : nodes_{Node{}}, root_(0), source_("0") {}

Expression Expression::parse(std::string_view source, VarSet allowed) {
  Expression e = ExpressionParser(source, allowed).run();
  if (e.arity() == 0) (void)e(0.0, 0.0, 0.0);  // surfaces constant domain errors now
  return e;
}

double Expression::evaluate(std::span<const double> point) const {
  if (point.size() != variables_.size())
    throw std::invalid_argument("expression of arity " + std::to_string(variables_.size()) +
                                " evaluated at a point of dimension " + std::to_string(point.size()));
  double binding[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < point.size(); ++i) binding[static_cast<int>(variables_[i])] = point[i];
  return eval_node(root_, binding);
}

double Expression::operator()(double t, double u, double v) const {
  const double binding[3] = {t, u, v};
  return eval_node(root_, binding);
}

double Expression::eval_node(std::int32_t index, const double (&binding)[3]) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  double r = 0.0;
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return binding[static_cast<int>(n.var)];
    case Op::neg: return -eval_node(n.lhs, binding);
    case Op::sin: r = std::sin(eval_node(n.lhs, binding)); break;
    case Op::cos: r = std::cos(eval_node(n.lhs, binding)); break;
    case Op::abs: return std::fabs(eval_node(n.lhs, binding));
    case Op::exp: r = std::exp(eval_node(n.lhs, binding)); break;
    case Op::log: {
      const double a = eval_node(n.lhs, binding);
      if (!(a > 0.0)) throw DomainError("log of non-positive value", subtree_text(index));
      r = std::log(a);
      break;
    }
    case Op::add: r = eval_node(n.lhs, binding) + eval_node(n.rhs, binding); break;
    case Op::sub: r = eval_node(n.lhs, binding) - eval_node(n.rhs, binding); break;
    case Op::mul: r = eval_node(n.lhs, binding) * eval_node(n.rhs, binding); break;
    case Op::div: {
      const double a = eval_node(n.lhs, binding);
      const double b = eval_node(n.rhs, binding);
      if (b == 0.0) throw DomainError("division by zero", subtree_text(index));
      r = a / b;
      break;
    }
    case Op::pow: {
      const double a = eval_node(n.lhs, binding);
      const double b = eval_node(n.rhs, binding);
      if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power", subtree_text(index));
      if (a < 0.0 && b != std::trunc(b))
        throw DomainError("negative base with non-integer exponent", subtree_text(index));
      r = std::pow(a, b);
      break;
    }
  }
  if (!std::isfinite(r)) throw DomainError("non-finite result", subtree_text(index));
  return r;
}

void Expression::print_node(std::int32_t index, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  switch (n.op) {
    case Op::constant: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
      out.append(buf, ptr);
      return;
    }
    case Op::variable: out.push_back(variable_name(n.var)); return;
    case Op::neg:
      out += "(-";
      print_node(n.lhs, out);
      out += ")";
      return;
    default: break;
  }
  if (is_binary(n.op)) {
    out += "(";
    print_node(n.lhs, out);
    out += op_symbol(n.op);
    print_node(n.rhs, out);
    out += ")";
  } else {
    out += op_symbol(n.op);
    out += "(";
    print_node(n.lhs, out);
    out += ")";
  }
}

std::string Expression::subtree_text(std::int32_t index) const {
  std::string out;
  print_node(index, out);
  return out;
}

std::string Expression::to_string() const { return subtree_text(root_); }

std::pair<double, double> bound_estimate(const Expression& e, int grid_per_axis) {
  if (grid_per_axis < 2) throw std::invalid_argument("bound_estimate: grid_per_axis must be >= 2");
  const std::size_t dim = e.arity();
  const auto g = static_cast<std::size_t>(grid_per_axis);

  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= g;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> point(dim);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t i = rest % g;
      rest /= g;
      point[d] = static_cast<double>(i) / static_cast<double>(g - 1);
    }
    const double value = e.evaluate(point);
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  }
  return {lo, hi};
}

}  // namespace lyapfix
