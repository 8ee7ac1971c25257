#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "meanfield/kernels.hpp"

namespace meanfield {

/// Outcome of sampling one kernel inequality. ratio is observed / bound, so
/// a property holds while every ratio stays within tolerance.
struct PropertyCheck {
  std::string name;
  std::size_t samples = 0;
  double max_ratio = 0.0;
  double tolerance = 1.0;
  std::size_t violations = 0;

  bool ok() const { return violations == 0; }
};

struct KernelCheckOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  int quadrature_points = 400;  // per axis, for the mollifier mass
};

/// Samples the pointwise kernel bounds:
///   force_bound           |grad W^eps| <= C_d eps^-(d-1)
///   force_bound_attained  the bound is reached within 1e-3 of |x| = eps
///   branch_continuity     inner and outer force branches agree on |x| = eps
///   lipschitz_envelope    |grad W^eps(x) - grad W^eps(y)| <= q^eps(x) |x - y|, |x - y| < 2 eps
///   mollifier_grad_bound  |grad phi^eps| <= K_phi eps^-(d+1)
///   mollifier_mass        |integral phi^eps - 1| <= 1e-8
///   velocity_cutoff_bound |phi_R(v)| <= 2R
///   drift_lipschitz       |G(x,v) - G(x',v')| <= L (|x-x'| + |v-v'|)
std::vector<PropertyCheck> kernel_property_suite(const ModelParams& p,
                                                 const KernelCheckOptions& options = {});

/// Tensor trapezoid rule for the mollifier over [-eps, eps]^d. The bump is
/// flat to all orders at the boundary, so the rule converges spectrally.
double mollifier_mass(const ModelParams& p, int points_per_axis = 400);

}  // namespace meanfield
