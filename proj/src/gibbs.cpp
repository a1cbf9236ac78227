#include "lyapfix/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace lyapfix {

RootedTree::RootedTree(int k, int depth) : k_(k), depth_(depth) {
  if (k < 1) throw std::invalid_argument("tree order k must be at least 1");
  if (depth < 0) throw std::invalid_argument("tree depth must be non-negative");

  // Breadth-first numbering: shell m occupies [shell_offset_[m], shell_offset_[m+1]).
  std::size_t width = 1;
  shell_offset_.push_back(0);
  for (int m = 0; m <= depth; ++m) {
    if (shell_offset_.back() + width > (std::size_t{1} << 24))
      throw FeasibilityError("tree with k=" + std::to_string(k) + ", n=" + std::to_string(depth) + " is too large");
    shell_offset_.push_back(shell_offset_.back() + width);
    width *= static_cast<std::size_t>(k);
  }

  const std::size_t count = shell_offset_.back();
  indices_.resize(count);
  std::iota(indices_.begin(), indices_.end(), std::size_t{0});
  parent_.assign(count, kNoParent);
  level_.assign(count, 0);
  successors_.assign(count, {});
  for (int m = 0; m <= depth; ++m)
    for (std::size_t x = shell_offset_[m]; x < shell_offset_[m + 1]; ++x) level_[x] = m;

  for (int m = 0; m < depth; ++m) {
    for (std::size_t x = shell_offset_[m]; x < shell_offset_[m + 1]; ++x) {
      const std::size_t first_child = shell_offset_[m + 1] + (x - shell_offset_[m]) * static_cast<std::size_t>(k);
      for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
        const std::size_t y = first_child + c;
        parent_[y] = x;
        successors_[x].push_back(y);
        edges_.push_back({x, y});
      }
      for (std::size_t a = 0; a < successors_[x].size(); ++a)
        for (std::size_t b = a + 1; b < successors_[x].size(); ++b)
          pairs_.push_back({successors_[x][a], x, successors_[x][b]});
    }
  }
}

std::span<const std::size_t> RootedTree::shell(int m) const {
  if (m < 0 || m > depth_) throw std::out_of_range("shell index out of range");
  return std::span<const std::size_t>(indices_).subspan(shell_offset_[m], shell_offset_[m + 1] - shell_offset_[m]);
}

std::span<const std::size_t> RootedTree::successors(std::size_t x) const { return successors_.at(x); }

BoundaryField::BoundaryField(std::function<double(double)> eval, GridFunction grid)
    : eval_(std::move(eval)), grid_(std::move(grid)) {}

BoundaryField BoundaryField::from_solution(const LyapunovOperator& op, const GridFunction& f) {
  auto shared = std::make_shared<const LyapunovOperator>(op);
  GridFunction values = f;
  auto eval = [shared, values](double t) { return shared->extend_H(values, t); };
  return BoundaryField(std::move(eval), f);
}

BoundaryField BoundaryField::from_expression(const Expression& e, std::shared_ptr<const QuadratureRule> rule) {
  for (Variable v : e.variables())
    if (v != Variable::t) throw std::invalid_argument("boundary field expression may only depend on t");
  const double at_zero = e(0.0, 0.0, 0.0);
  if (!(at_zero > 0.0)) throw std::invalid_argument("boundary field must be positive at t = 0");
  auto eval = [e, at_zero](double t) { return e(t, 0.0, 0.0) / at_zero; };
  GridFunction grid = GridFunction::sample(std::move(rule), eval);
  return BoundaryField(std::move(eval), std::move(grid));
}

double BoundaryField::log_value(double t) const {
  const double f = value(t);
  if (!(f > 0.0) || !std::isfinite(f))
    throw std::domain_error("boundary field value " + std::to_string(f) + " at t=" + std::to_string(t) +
                            " is not positive and finite");
  return std::log(f);
}

double energy(const RootedTree& tree, std::span<const double> spins, const ModelParams& params) {
  if (spins.size() != tree.vertex_count())
    throw std::invalid_argument("configuration has " + std::to_string(spins.size()) + " spins for " +
                                std::to_string(tree.vertex_count()) + " vertices");
  for (double s : spins)
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("spin " + std::to_string(s) + " outside [0,1]");

  double h = 0.0;
  if (params.J3 != 0.0 || params.J != 0.0) {
    double triples = 0.0;
    double pairs = 0.0;
    for (const auto& p : tree.sibling_pairs()) {
      if (params.J3 != 0.0) triples += params.xi1(spins[p.parent], spins[p.first], spins[p.second]);
      if (params.J != 0.0) pairs += params.xi2(0.0, spins[p.first], spins[p.second]);
    }
    h -= params.J3 * triples + params.J * pairs;
  }
  if (params.J1 != 0.0) {
    double edges = 0.0;
    for (const auto& e : tree.edges()) edges += params.xi3(spins[e.parent], spins[e.child], 0.0);
    h -= params.J1 * edges;
  }
  if (params.alpha != 0.0) {
    double total = 0.0;
    for (double s : spins) total += s;
    h -= params.alpha * total;
  }
  return h;
}

double PartitionFunction::value() const { return std::exp(log_z); }

namespace {

// One tensor axis per vertex: the spin values it ranges over and their log weights.
struct SpinAxis {
  std::vector<double> values;
  std::vector<double> log_weights;
};

SpinAxis quadrature_axis(const QuadratureRule& rule) {
  SpinAxis a;
  a.values = rule.nodes;
  for (double w : rule.weights) a.log_weights.push_back(std::log(w));
  return a;
}

SpinAxis fixed_axis(double spin) { return SpinAxis{{spin}, {0.0}}; }

void check_feasible(const std::vector<SpinAxis>& axes) {
  double terms = 1.0;
  for (const auto& a : axes) terms *= static_cast<double>(a.values.size());
  if (terms > kMaxTensorTerms)
    throw FeasibilityError("tensor quadrature over " + std::to_string(axes.size()) + " spins needs " +
                           std::to_string(terms) + " terms (limit 1e8)");
}

// log sum over the tensor grid of prod(w) exp(-beta H + sum_{W_n} h), with
// running max-exponent subtraction.
double log_tensor_sum(const RootedTree& tree, const ModelParams& params, const BoundaryField& field,
                      const std::vector<SpinAxis>& axes) {
  check_feasible(axes);
  const std::size_t nv = tree.vertex_count();
  const auto boundary = tree.shell(tree.depth());

  // h at every candidate spin of each boundary vertex.
  std::vector<std::vector<double>> boundary_log(nv);
  for (std::size_t x : boundary)
    for (double s : axes[x].values) boundary_log[x].push_back(field.log_value(s));

  std::vector<std::size_t> index(nv, 0);
  std::vector<double> spins(nv);
  double running_max = -std::numeric_limits<double>::infinity();
  double scaled_sum = 0.0;
  for (;;) {
    double e = 0.0;
    for (std::size_t x = 0; x < nv; ++x) {
      spins[x] = axes[x].values[index[x]];
      e += axes[x].log_weights[index[x]];
    }
    for (std::size_t x : boundary) e += boundary_log[x][index[x]];
    e -= params.beta * energy(tree, spins, params);
    if (!std::isfinite(e)) throw std::range_error("non-finite Gibbs exponent");

    if (e > running_max) {
      scaled_sum = scaled_sum * std::exp(running_max - e) + 1.0;
      running_max = e;
    } else {
      scaled_sum += std::exp(e - running_max);
    }

    // odometer, last vertex fastest
    std::size_t x = nv;
    while (x > 0) {
      --x;
      if (++index[x] < axes[x].values.size()) break;
      index[x] = 0;
      if (x == 0) return running_max + std::log(scaled_sum);
    }
  }
}

}  // namespace

PartitionFunction partition_function(const RootedTree& tree, const ModelParams& params, const BoundaryField& field,
                                     const QuadratureRule& spin_rule) {
  std::vector<SpinAxis> axes(tree.vertex_count(), quadrature_axis(spin_rule));
  return PartitionFunction{log_tensor_sum(tree, params, field, axes)};
}

FiniteVolumeMeasure::FiniteVolumeMeasure(const RootedTree& tree, const ModelParams& params,
                                         const BoundaryField& field, const QuadratureRule& spin_rule)
    : tree_(tree), params_(params), field_(field), rule_(spin_rule),
      z_(partition_function(tree, params, field, spin_rule)) {}

double FiniteVolumeMeasure::density(std::span<const double> spins) const {
  double e = -params_.beta * energy(tree_, spins, params_);
  for (std::size_t x : tree_.shell(tree_.depth())) e += field_.log_value(spins[x]);
  return std::exp(e - z_.log_z);
}

double FiniteVolumeMeasure::boundary_marginal(std::span<const double> interior) const {
  const auto boundary = tree_.shell(tree_.depth());
  if (interior.size() != tree_.vertex_count() - boundary.size())
    throw std::invalid_argument("interior configuration has the wrong number of spins");
  std::vector<SpinAxis> axes;
  axes.reserve(tree_.vertex_count());
  for (double s : interior) axes.push_back(fixed_axis(s));
  for (std::size_t i = 0; i < boundary.size(); ++i) axes.push_back(quadrature_axis(rule_));
  return std::exp(log_tensor_sum(tree_, params_, field_, axes) - z_.log_z);
}

double FiniteVolumeMeasure::total_mass() const {
  const std::size_t nv = tree_.vertex_count();
  const std::size_t q = rule_.size();
  if (std::pow(static_cast<double>(q), static_cast<double>(nv)) > kMaxTensorTerms)
    throw FeasibilityError("total_mass: tensor grid too large");
  std::vector<std::size_t> index(nv, 0);
  std::vector<double> spins(nv);
  double mass = 0.0;
  for (;;) {
    double w = 1.0;
    for (std::size_t x = 0; x < nv; ++x) {
      spins[x] = rule_.nodes[index[x]];
      w *= rule_.weights[index[x]];
    }
    mass += w * density(spins);
    std::size_t x = nv;
    while (x > 0) {
      --x;
      if (++index[x] < q) break;
      index[x] = 0;
      if (x == 0) return mass;
    }
  }
}

double mu_n(const FiniteVolumeMeasure& measure, std::span<const double> spins) { return measure.density(spins); }

double compatibility_residual(const RootedTree& tree, const ModelParams& params, const BoundaryField& field,
                              const QuadratureRule& spin_rule, int sup_points_per_vertex) {
  if (tree.depth() < 1) throw std::invalid_argument("compatibility_residual needs depth >= 1");
  if (sup_points_per_vertex < 2) throw std::invalid_argument("sup grid needs at least 2 points per vertex");

  const RootedTree inner(tree.k(), tree.depth() - 1);
  const std::size_t ni = inner.vertex_count();
  const std::size_t nb = tree.vertex_count() - ni;
  const double sup_terms = std::pow(static_cast<double>(sup_points_per_vertex), static_cast<double>(ni));
  const double per_point = std::pow(static_cast<double>(spin_rule.size()), static_cast<double>(nb));
  if (sup_terms * per_point > kMaxTensorTerms)
    throw FeasibilityError("compatibility check needs " + std::to_string(sup_terms * per_point) +
                           " tensor terms (limit 1e8)");

  const FiniteVolumeMeasure outer_measure(tree, params, field, spin_rule);
  const FiniteVolumeMeasure inner_measure(inner, params, field, spin_rule);

  const auto p = static_cast<std::size_t>(sup_points_per_vertex);
  std::vector<std::size_t> index(ni, 0);
  std::vector<double> interior(ni);
  double worst = 0.0;
  for (;;) {
    for (std::size_t x = 0; x < ni; ++x) interior[x] = static_cast<double>(index[x]) / static_cast<double>(p - 1);
    const double lhs = outer_measure.boundary_marginal(interior);
    const double rhs = inner_measure.density(interior);
    worst = std::max(worst, std::fabs(lhs - rhs));
    std::size_t x = ni;
    while (x > 0) {
      --x;
      if (++index[x] < p) break;
      index[x] = 0;
      if (x == 0) return worst;
    }
  }
}

double consistency_residual(const LyapunovOperator& op, const BoundaryField& field) {
  return op.residual(field.grid(), Equation::H);
}

double product_form_check(const LyapunovOperator& op, const GridFunction& f) {
  const ModelParams& p = op.kernel().params();
  if (p.J3 != 0.0 || p.J != 0.0 || p.alpha != 0.0 || p.J1 == 0.0)
    throw std::invalid_argument("product_form_check requires J3 = J = alpha = 0 and J1 != 0");

  const QuadratureRule& rule = op.rule();
  auto factor = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      s += rule.weights[i] * std::exp(p.J1 * p.beta * p.xi3(t, rule.nodes[i], 0.0)) * f[i];
    return s;
  };
  const double at_zero = factor(0.0);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const double ratio = factor(t) / at_zero;
    worst = std::max(worst, std::fabs(op.extend_H(f, t) - ratio * ratio));
  }
  return worst;
}

}  // namespace lyapfix
