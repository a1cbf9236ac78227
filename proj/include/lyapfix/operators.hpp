#ifndef LYAPFIX_OPERATORS_HPP
#define LYAPFIX_OPERATORS_HPP

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "lyapfix/kernel.hpp"
#include "lyapfix/quadrature.hpp"

namespace lyapfix {

class OperatorError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Strictly positive function on [0,1] stored by its values at quadrature nodes.
class GridFunction {
public:
  /// Throws OperatorError if sizes disagree or a value is not positive and finite.
  GridFunction(std::shared_ptr<const QuadratureRule> rule, std::vector<double> values);

  static GridFunction constant(std::shared_ptr<const QuadratureRule> rule, double c);

  template <class F>
  static GridFunction sample(std::shared_ptr<const QuadratureRule> rule, F&& fn) {
    std::vector<double> values;
    values.reserve(rule->size());
    for (double x : rule->nodes) values.push_back(fn(x));
    return GridFunction(std::move(rule), std::move(values));
  }

  const QuadratureRule& rule() const { return *rule_; }
  const std::shared_ptr<const QuadratureRule>& rule_ptr() const { return rule_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  GridFunction scaled(double c) const;
  double max() const;
  double min() const;

private:
  std::shared_ptr<const QuadratureRule> rule_;
  std::vector<double> values_;
};

/// Sup-norm distance between two functions on the same rule.
double sup_distance(const GridFunction& a, const GridFunction& b);

enum class Equation { H, L };

/// Nystrom discretisation of
///   (L f)(t) = int int K(t,u,v) f(u) f(v) du dv
///   (H f)(t) = (L f)(t) / (L f)(0)
/// Off-grid arguments re-evaluate the quadrature sum at the requested t.
class LyapunovOperator {
public:
  LyapunovOperator(Kernel kernel, std::shared_ptr<const QuadratureRule> rule);

  const Kernel& kernel() const { return kernel_; }
  const QuadratureRule& rule() const { return *rule_; }
  const std::shared_ptr<const QuadratureRule>& rule_ptr() const { return rule_; }

  double extend_L(const GridFunction& f, double t) const;
  double extend_H(const GridFunction& f, double t) const;

  /// int int K(0,u,v) f(u) f(v) du dv.
  double denominator(const GridFunction& f) const;

  GridFunction apply_L(const GridFunction& f) const;
  GridFunction apply_H(const GridFunction& f) const;

  /// Max over nodes of |image - f| for the chosen equation.
  double residual(const GridFunction& f, Equation which) const;

  /// d(Hf)(t_i) / d f(x_j) by the quotient rule.
  Eigen::MatrixXd jacobian_H(const GridFunction& f) const;
  /// d(Lf)(t_i) / d f(x_j).
  Eigen::MatrixXd jacobian_L(const GridFunction& f) const;

private:
  // Row-major n x n matrix of K(t, x_p, x_q).
  std::span<const double> slice_at_node(std::size_t i, std::vector<double>& scratch) const;
  void fill_slice(double t, std::vector<double>& out) const;
  static double quadratic_form(std::span<const double> slice, std::span<const double> a);
  std::vector<double> weighted(const GridFunction& f) const;
  void check_rule(const GridFunction& f) const;

  Kernel kernel_;
  std::shared_ptr<const QuadratureRule> rule_;
  std::vector<double> node_tensor_;  // empty when the cache would be too large
  std::vector<double> origin_slice_;
};

GridFunction apply_L(const Kernel& k, const GridFunction& f);
GridFunction apply_H(const Kernel& k, const GridFunction& f);
double residual(const Kernel& k, const GridFunction& f, Equation which);
Eigen::MatrixXd jacobian_H(const Kernel& k, const GridFunction& f);

}  // namespace lyapfix

#endif  // LYAPFIX_OPERATORS_HPP
