#ifndef LYAPFIX_GIBBS_HPP
#define LYAPFIX_GIBBS_HPP

// Finite-volume Gibbs distributions on the rooted half-tree (every vertex,
// root included, has k successors) with spins in [0,1], evaluated by tensor
// Gauss-Legendre quadrature over all spins.

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "lyapfix/operators.hpp"

namespace lyapfix {

class FeasibilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Largest number of tensor-quadrature terms a single Gibbs sum may visit.
inline constexpr double kMaxTensorTerms = 1e8;

class RootedTree {
public:
  struct Edge {
    std::size_t parent;
    std::size_t child;
  };
  /// Siblings x < z sharing parent y; doubles as the triple <x, y, z>.
  struct SiblingPair {
    std::size_t first;
    std::size_t parent;
    std::size_t second;
  };

  RootedTree(int k, int depth);

  int k() const { return k_; }
  int depth() const { return depth_; }
  std::size_t vertex_count() const { return parent_.size(); }

  /// Vertices at distance m from the root, contiguous indices.
  std::span<const std::size_t> shell(int m) const;
  std::span<const std::size_t> successors(std::size_t x) const;
  std::size_t parent(std::size_t x) const { return parent_[x]; }
  int level(std::size_t x) const { return level_[x]; }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<SiblingPair>& sibling_pairs() const { return pairs_; }

  static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

private:
  int k_;
  int depth_;
  std::vector<std::size_t> indices_;
  std::vector<std::size_t> shell_offset_;
  std::vector<std::size_t> parent_;
  std::vector<int> level_;
  std::vector<std::vector<std::size_t>> successors_;
  std::vector<Edge> edges_;
  std::vector<SiblingPair> pairs_;
};

/// Translation-invariant boundary law f(t) = exp(h(t) - h(0)), normalised so
/// that f(0) = 1.
class BoundaryField {
public:
  /// Nystrom extension t -> (Hf)(t) of a solved H fixed point.
  static BoundaryField from_solution(const LyapunovOperator& op, const GridFunction& f);
  /// Closed-form field f(t) = e(t) / e(0), sampled on rule for grid use.
  static BoundaryField from_expression(const Expression& e, std::shared_ptr<const QuadratureRule> rule);

  double value(double t) const { return eval_(t); }
  double log_value(double t) const;
  /// Values at the nodes of the rule the field was built on.
  const GridFunction& grid() const { return grid_; }

private:
  BoundaryField(std::function<double(double)> eval, GridFunction grid);

  std::function<double(double)> eval_;
  GridFunction grid_;
};

/// Hamiltonian with each triple, sibling pair, edge and vertex of V_n counted
/// once.  xi1 and xi3 take the parent spin first.  Throws std::invalid_argument
/// if a spin lies outside [0,1].
double energy(const RootedTree& tree, std::span<const double> spins, const ModelParams& params);

struct PartitionFunction {
  double log_z = 0.0;
  double value() const;
};

/// Z_n = int exp(-beta H(s) + sum_{x in W_n} h(s_x)) ds over [0,1]^{V_n}.
PartitionFunction partition_function(const RootedTree& tree, const ModelParams& params, const BoundaryField& field,
                                     const QuadratureRule& spin_rule);

/// Normalised density mu_n on [0,1]^{V_n}.
class FiniteVolumeMeasure {
public:
  FiniteVolumeMeasure(const RootedTree& tree, const ModelParams& params, const BoundaryField& field,
                      const QuadratureRule& spin_rule);

  double density(std::span<const double> spins) const;
  const PartitionFunction& partition() const { return z_; }

  /// Integral of density over the boundary shell W_n with interior spins fixed.
  double boundary_marginal(std::span<const double> interior) const;

  /// Tensor-quadrature integral of the density over all spins.
  double total_mass() const;

private:
  RootedTree tree_;
  ModelParams params_;
  BoundaryField field_;
  QuadratureRule rule_;
  PartitionFunction z_;
};

double mu_n(const FiniteVolumeMeasure& measure, std::span<const double> spins);

/// Sup over a grid of interior configurations of
/// |int mu_n(s_{n-1} v w) dw - mu_{n-1}(s_{n-1})|.  Requires depth >= 1.
double compatibility_residual(const RootedTree& tree, const ModelParams& params, const BoundaryField& field,
                              const QuadratureRule& spin_rule, int sup_points_per_vertex = 5);

/// sup over nodes of |Hf - f| for the field's grid values.
double consistency_residual(const LyapunovOperator& op, const BoundaryField& field);

/// With J3 = J = alpha = 0, compares Hf(t) against the squared one-dimensional
/// factor (int e^{J1 beta xi3(t,u)} f(u) du / int e^{J1 beta xi3(0,u)} f(u) du)^2
/// on a 101-point t grid.  Throws std::invalid_argument otherwise.
double product_form_check(const LyapunovOperator& op, const GridFunction& f);

}  // namespace lyapfix

#endif  // LYAPFIX_GIBBS_HPP
