#ifndef LYAPFIX_KERNEL_HPP
#define LYAPFIX_KERNEL_HPP

#include <cmath>

#include "lyapfix/expr.hpp"

namespace lyapfix {

/// Couplings, inverse temperature and the three interaction functions of the
/// four-interaction Hamiltonian.  xi1 is over (t,u,v), xi2 over (u,v) and xi3
/// over (t,u); t is always the spin of the parent vertex.
struct ModelParams {
  double J3 = 0.0;
  double J = 0.0;
  double J1 = 0.0;
  double alpha = 0.0;
  double beta = 1.0;
  Expression xi1;
  Expression xi2;
  Expression xi3;

  /// Parses the three expressions against their variable sets.
  static ModelParams with_expressions(double J3, double J, double J1, double alpha, double beta,
                                      std::string_view xi1, std::string_view xi2, std::string_view xi3);

  /// Throws std::invalid_argument unless beta > 0 and couplings are finite.
  void validate() const;
};

struct BoundsOptions {
  int grid = 64;
  int refine = 3;
};

/// Extremes of the kernel over [0,1]^3, found on the exponent.
struct KernelBounds {
  double omega = 1.0;        // min K
  double Omega = 1.0;        // max K
  double min_exponent = 0.0;
  double max_exponent = 0.0;
  int grid = 0;
  int refine = 0;

  /// Omega / omega, computed as exp(max_exponent - min_exponent).
  double ratio() const { return std::exp(max_exponent - min_exponent); }
};

/// K(t,u,v) = exp(beta (J3 xi1(t,u,v) + J xi2(u,v) + J1 (xi3(t,u) + xi3(t,v)) + alpha (u+v))).
class Kernel {
public:
  Kernel(ModelParams params, KernelBounds bounds);

  double exponent(double t, double u, double v) const;
  double operator()(double t, double u, double v) const { return std::exp(exponent(t, u, v)); }

  const ModelParams& params() const { return params_; }
  const KernelBounds& bounds() const { return bounds_; }
  double omega() const { return bounds_.omega; }
  double Omega() const { return bounds_.Omega; }

private:
  ModelParams params_;
  KernelBounds bounds_;
};

Kernel build_kernel(ModelParams params, BoundsOptions options = {});

/// Grid search on the exponent over a uniform grid including corners, then
/// refine_rounds local zooms (4x per round) around the running argmin and
/// argmax.  Sampled extremes only ever widen.
KernelBounds kernel_bounds(const Kernel& k, int grid_per_axis, int refine_rounds);

/// 1/2 sqrt(sqrt(17) + 1): sharp end of the admissible interval for c.
double uniqueness_threshold();

struct UniquenessCheck {
  bool satisfied = false;
  double ratio = 1.0;
  double c_max = 0.0;
};

/// Decides max K < c min K for some c in (1, c_max), i.e. Omega/omega < c_max.
UniquenessCheck uniqueness_check(const Kernel& k);

}  // namespace lyapfix

#endif  // LYAPFIX_KERNEL_HPP
