#include "lyapfix/quadrature.hpp"

#include <numbers>

namespace lyapfix {

namespace {

struct Legendre {
  double value;
  double derivative;
};

// P_n(x) and P_n'(x) by the three-term recurrence.
Legendre legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  if (n == 0) return {1.0, 0.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1 || n > kMaxQuadratureNodes)
    throw QuadratureError("gauss_legendre: node count " + std::to_string(n) + " outside [1, " +
                          std::to_string(kMaxQuadratureNodes) + "]");

  const auto count = static_cast<std::size_t>(n);
  QuadratureRule rule;
  rule.nodes.assign(count, 0.0);
  rule.weights.assign(count, 0.0);

  // Roots of P_n on (-1,1) come in +/- pairs; solve for the positive half and
  // mirror so the rule is exactly symmetric on [0,1].
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    Legendre p{};
    for (int iter = 0; iter < 100; ++iter) {
      p = legendre(n, x);
      const double dx = p.value / p.derivative;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    if (n % 2 == 1 && i == half - 1) x = 0.0;
    p = legendre(n, x);
    const double w = 2.0 / ((1.0 - x * x) * p.derivative * p.derivative);

    // x > 0 maps to the upper half of [0,1].
    const std::size_t hi = count - 1 - static_cast<std::size_t>(i);
    const std::size_t lo = static_cast<std::size_t>(i);
    rule.nodes[hi] = 0.5 + 0.5 * x;
    rule.nodes[lo] = 0.5 - 0.5 * x;
    rule.weights[hi] = 0.5 * w;
    rule.weights[lo] = 0.5 * w;
  }
  if (n % 2 == 1) rule.nodes[count / 2] = 0.5;
  return rule;
}

}  // namespace lyapfix
