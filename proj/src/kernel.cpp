#include "lyapfix/kernel.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <stdexcept>
#include <string>

namespace lyapfix {

ModelParams ModelParams::with_expressions(double J3, double J, double J1, double alpha, double beta,
                                          std::string_view xi1, std::string_view xi2, std::string_view xi3) {
  ModelParams p;
  p.J3 = J3;
  p.J = J;
  p.J1 = J1;
  p.alpha = alpha;
  p.beta = beta;
  p.xi1 = Expression::parse(xi1, {Variable::t, Variable::u, Variable::v});
  p.xi2 = Expression::parse(xi2, {Variable::u, Variable::v});
  p.xi3 = Expression::parse(xi3, {Variable::t, Variable::u});
  return p;
}

void ModelParams::validate() const {
  for (double c : {J3, J, J1, alpha})
    if (!std::isfinite(c)) throw std::invalid_argument("coupling constants must be finite");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive and finite");
  for (Variable v : xi2.variables())
    if (v == Variable::t) throw std::invalid_argument("xi2 must not depend on t");
  for (Variable v : xi3.variables())
    if (v == Variable::v) throw std::invalid_argument("xi3 must be a function of (t, u)");
}

Kernel::Kernel(ModelParams params, KernelBounds bounds) : params_(std::move(params)), bounds_(bounds) {}

double Kernel::exponent(double t, double u, double v) const {
  const ModelParams& p = params_;
  double sum = 0.0;
  // Skipping zero couplings keeps exponents finite when an unused xi blows up.
  if (p.J3 != 0.0) sum += p.J3 * p.xi1(t, u, v);
  if (p.J != 0.0) sum += p.J * p.xi2(0.0, u, v);
  if (p.J1 != 0.0) sum += p.J1 * (p.xi3(t, u, 0.0) + p.xi3(t, v, 0.0));
  if (p.alpha != 0.0) sum += p.alpha * (u + v);
  return p.beta * sum;
}

namespace {

struct Extreme {
  double value;
  std::array<double, 3> at;
};

void scan(const Kernel& k, const std::array<double, 3>& lo, double spacing, int points, Extreme& mn,
          Extreme& mx) {
  std::array<double, 3> x{};
  for (int i = 0; i < points; ++i) {
    x[0] = std::clamp(lo[0] + i * spacing, 0.0, 1.0);
    for (int j = 0; j < points; ++j) {
      x[1] = std::clamp(lo[1] + j * spacing, 0.0, 1.0);
      for (int l = 0; l < points; ++l) {
        x[2] = std::clamp(lo[2] + l * spacing, 0.0, 1.0);
        const double e = k.exponent(x[0], x[1], x[2]);
        if (e < mn.value) mn = {e, x};
        if (e > mx.value) mx = {e, x};
      }
    }
  }
}

constexpr int kZoomPoints = 17;  // 16 intervals across +-2 old spacings: 4x finer

}  // namespace

KernelBounds kernel_bounds(const Kernel& k, int grid_per_axis, int refine_rounds) {
  if (grid_per_axis < 4) throw std::invalid_argument("kernel_bounds: grid_per_axis must be >= 4");
  if (refine_rounds < 0) throw std::invalid_argument("kernel_bounds: refine_rounds must be >= 0");

  Extreme mn{std::numeric_limits<double>::infinity(), {}};
  Extreme mx{-std::numeric_limits<double>::infinity(), {}};

  // Coarse pass: exact i/(g-1) coordinates so corners are hit exactly.
  const int g = grid_per_axis;
  std::array<double, 3> x{};
  for (int i = 0; i < g; ++i) {
    x[0] = static_cast<double>(i) / (g - 1);
    for (int j = 0; j < g; ++j) {
      x[1] = static_cast<double>(j) / (g - 1);
      for (int l = 0; l < g; ++l) {
        x[2] = static_cast<double>(l) / (g - 1);
        const double e = k.exponent(x[0], x[1], x[2]);
        if (e < mn.value) mn = {e, x};
        if (e > mx.value) mx = {e, x};
      }
    }
  }

  double spacing = 1.0 / (g - 1);
  for (int round = 0; round < refine_rounds; ++round) {
    const double fine = spacing / 4.0;
    for (const Extreme incumbent : {mn, mx}) {
      std::array<double, 3> lo{};
      for (int d = 0; d < 3; ++d) lo[d] = incumbent.at[d] - 2.0 * spacing;
      scan(k, lo, fine, kZoomPoints, mn, mx);
    }
    spacing = fine;
  }

  KernelBounds b;
  b.min_exponent = mn.value;
  b.max_exponent = mx.value;
  b.omega = std::exp(mn.value);
  b.Omega = std::exp(mx.value);
  b.grid = grid_per_axis;
  b.refine = refine_rounds;
  if (!(b.omega > 0.0) || !std::isfinite(b.Omega))
    throw std::range_error("kernel bounds out of floating-point range: exponent in [" +
                           std::to_string(mn.value) + ", " + std::to_string(mx.value) + "]");
  return b;
}

Kernel build_kernel(ModelParams params, BoundsOptions options) {
  params.validate();
  Kernel unbounded(std::move(params), KernelBounds{});
  KernelBounds b = kernel_bounds(unbounded, options.grid, options.refine);
  return Kernel(unbounded.params(), b);
}

double uniqueness_threshold() { return 0.5 * std::sqrt(std::sqrt(17.0) + 1.0); }

UniquenessCheck uniqueness_check(const Kernel& k) {
  UniquenessCheck out;
  out.c_max = uniqueness_threshold();
  out.ratio = k.bounds().ratio();
  out.satisfied = out.ratio < out.c_max;
  return out;
}

}  // namespace lyapfix
