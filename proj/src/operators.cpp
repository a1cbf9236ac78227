#include "lyapfix/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lyapfix {

namespace {
constexpr std::size_t kMaxCachedTensor = std::size_t{1} << 21;  // doubles
}

GridFunction::GridFunction(std::shared_ptr<const QuadratureRule> rule, std::vector<double> values)
    : rule_(std::move(rule)), values_(std::move(values)) {
  if (!rule_) throw OperatorError("grid function without a quadrature rule");
  if (values_.size() != rule_->size())
    throw OperatorError("grid function has " + std::to_string(values_.size()) + " values for a " +
                        std::to_string(rule_->size()) + "-node rule");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
      throw OperatorError("grid function value " + std::to_string(values_[i]) + " at node " + std::to_string(i) +
                          " is not positive and finite");
}

GridFunction GridFunction::constant(std::shared_ptr<const QuadratureRule> rule, double c) {
  std::vector<double> values(rule->size(), c);
  return GridFunction(std::move(rule), std::move(values));
}

GridFunction GridFunction::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return GridFunction(rule_, std::move(v));
}

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

double sup_distance(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw OperatorError("sup_distance: functions live on different rules");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

LyapunovOperator::LyapunovOperator(Kernel kernel, std::shared_ptr<const QuadratureRule> rule)
    : kernel_(std::move(kernel)), rule_(std::move(rule)) {
  const std::size_t n = rule_->size();
  fill_slice(0.0, origin_slice_);
  if (n * n * n <= kMaxCachedTensor) {
    node_tensor_.resize(n * n * n);
    std::vector<double> slice;
    for (std::size_t i = 0; i < n; ++i) {
      fill_slice(rule_->nodes[i], slice);
      std::copy(slice.begin(), slice.end(), node_tensor_.begin() + static_cast<std::ptrdiff_t>(i * n * n));
    }
  }
}

void LyapunovOperator::fill_slice(double t, std::vector<double>& out) const {
  const std::size_t n = rule_->size();
  out.resize(n * n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      const double k = kernel_(t, rule_->nodes[p], rule_->nodes[q]);
      if (!std::isfinite(k) || !(k > 0.0))
        throw OperatorError("kernel value " + std::to_string(k) + " at (" + std::to_string(t) + ", " +
                            std::to_string(rule_->nodes[p]) + ", " + std::to_string(rule_->nodes[q]) +
                            ") is not positive and finite");
      out[p * n + q] = k;
    }
}

std::span<const double> LyapunovOperator::slice_at_node(std::size_t i, std::vector<double>& scratch) const {
  const std::size_t n = rule_->size();
  if (!node_tensor_.empty()) return std::span<const double>(node_tensor_).subspan(i * n * n, n * n);
  fill_slice(rule_->nodes[i], scratch);
  return scratch;
}

double LyapunovOperator::quadratic_form(std::span<const double> slice, std::span<const double> a) {
  const std::size_t n = a.size();
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double row = 0.0;
    const double* k = slice.data() + p * n;
    for (std::size_t q = 0; q < n; ++q) row += k[q] * a[q];
    sum += a[p] * row;
  }
  return sum;
}

std::vector<double> LyapunovOperator::weighted(const GridFunction& f) const {
  check_rule(f);
  std::vector<double> a(f.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rule_->weights[i] * f[i];
  return a;
}

void LyapunovOperator::check_rule(const GridFunction& f) const {
  if (f.size() != rule_->size())
    throw OperatorError("grid function on " + std::to_string(f.size()) + " nodes applied to a " +
                        std::to_string(rule_->size()) + "-node operator");
}

double LyapunovOperator::extend_L(const GridFunction& f, double t) const {
  const std::vector<double> a = weighted(f);
  if (t == 0.0) return quadratic_form(origin_slice_, a);
  std::vector<double> slice;
  fill_slice(t, slice);
  return quadratic_form(slice, a);
}

double LyapunovOperator::denominator(const GridFunction& f) const {
  return quadratic_form(origin_slice_, weighted(f));
}

double LyapunovOperator::extend_H(const GridFunction& f, double t) const {
  const double d = denominator(f);
  if (!(d > 0.0) || !std::isfinite(d)) throw OperatorError("denominator of H underflowed or overflowed");
  if (t == 0.0) return 1.0;
  return extend_L(f, t) / d;
}

GridFunction LyapunovOperator::apply_L(const GridFunction& f) const {
  const std::vector<double> a = weighted(f);
  std::vector<double> out(f.size());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = quadratic_form(slice_at_node(i, scratch), a);
  return GridFunction(rule_, std::move(out));
}

GridFunction LyapunovOperator::apply_H(const GridFunction& f) const {
  const std::vector<double> a = weighted(f);
  const double d = quadratic_form(origin_slice_, a);
  if (!(d > 0.0) || !std::isfinite(d)) throw OperatorError("denominator of H underflowed or overflowed");
  std::vector<double> out(f.size());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = quadratic_form(slice_at_node(i, scratch), a) / d;
  return GridFunction(rule_, std::move(out));
}

double LyapunovOperator::residual(const GridFunction& f, Equation which) const {
  const GridFunction image = which == Equation::H ? apply_H(f) : apply_L(f);
  return sup_distance(image, f);
}

Eigen::MatrixXd LyapunovOperator::jacobian_L(const GridFunction& f) const {
  const std::vector<double> a = weighted(f);
  const std::size_t n = a.size();
  Eigen::MatrixXd jac(n, n);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    const auto slice = slice_at_node(i, scratch);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < n; ++q) s += (slice[j * n + q] + slice[q * n + j]) * a[q];
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rule_->weights[j] * s;
    }
  }
  return jac;
}

Eigen::MatrixXd LyapunovOperator::jacobian_H(const GridFunction& f) const {
  const std::vector<double> a = weighted(f);
  const std::size_t n = a.size();
  const double d = quadratic_form(origin_slice_, a);
  if (!(d > 0.0) || !std::isfinite(d)) throw OperatorError("denominator of H underflowed or overflowed");

  Eigen::VectorXd grad_d(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t q = 0; q < n; ++q) s += (origin_slice_[j * n + q] + origin_slice_[q * n + j]) * a[q];
    grad_d(static_cast<Eigen::Index>(j)) = rule_->weights[j] * s;
  }

  const Eigen::MatrixXd jl = jacobian_L(f);
  Eigen::VectorXd lf(n);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n; ++i)
    lf(static_cast<Eigen::Index>(i)) = quadratic_form(slice_at_node(i, scratch), a);

  return jl / d - (lf * grad_d.transpose()) / (d * d);
}

GridFunction apply_L(const Kernel& k, const GridFunction& f) { return LyapunovOperator(k, f.rule_ptr()).apply_L(f); }
GridFunction apply_H(const Kernel& k, const GridFunction& f) { return LyapunovOperator(k, f.rule_ptr()).apply_H(f); }
double residual(const Kernel& k, const GridFunction& f, Equation which) {
  return LyapunovOperator(k, f.rule_ptr()).residual(f, which);
}
Eigen::MatrixXd jacobian_H(const Kernel& k, const GridFunction& f) {
  return LyapunovOperator(k, f.rule_ptr()).jacobian_H(f);
}

}  // namespace lyapfix
