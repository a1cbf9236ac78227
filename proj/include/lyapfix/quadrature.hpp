#ifndef LYAPFIX_QUADRATURE_HPP
#define LYAPFIX_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lyapfix {

class QuadratureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Gauss-Legendre rule on [0,1].  Nodes strictly increasing and symmetric
/// about 1/2; weights positive and summing to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

inline constexpr int kMaxQuadratureNodes = 512;

/// n-point rule, 1 <= n <= 512.  Nodes come from Newton iteration on P_n.
QuadratureRule gauss_legendre(int n);

template <class F>
double integrate(const QuadratureRule& rule, F&& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double value = g(rule.nodes[i]);
    if (!std::isfinite(value))
      throw QuadratureError("integrand is not finite at node " + std::to_string(rule.nodes[i]));
    sum += rule.weights[i] * value;
  }
  return sum;
}

/// Sum_ij w_i w_j g(x_i, x_j), reduced row by row in index order.
template <class G>
double integrate_2d(const QuadratureRule& rule, G&& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double value = g(rule.nodes[i], rule.nodes[j]);
      if (!std::isfinite(value))
        throw QuadratureError("integrand is not finite at node (" + std::to_string(rule.nodes[i]) + ", " +
                              std::to_string(rule.nodes[j]) + ")");
      row += rule.weights[j] * value;
    }
    sum += rule.weights[i] * row;
  }
  return sum;
}

}  // namespace lyapfix

#endif  // LYAPFIX_QUADRATURE_HPP
