#pragma once

// Pointwise kernels of the regularized particle model: cut-off Newtonian
// force, its Lipschitz envelope, the mollifier, the velocity cutoff and the
// linear drift. Everything here is a pure function of its arguments.

#include <cmath>
#include <span>

#include "meanfield/vec.hpp"

namespace meanfield {

/// Which velocity enters the numerator of the local-velocity average.
/// Neighbor uses phi_R(v_j) of the source particles (the mean-field reading),
/// Self uses phi_R(v_i) of the particle being accelerated (the literal one).
enum class AlignmentIndex { Neighbor, Self };

struct ModelParams {
  int dim = 2;
  double lambda = 1.0;      // interaction and confinement strength
  double beta = 1.0;        // alignment strength
  double gamma_damp = 1.0;  // linear damping
  double c_d = 1.0;         // Newtonian normalization
  double epsilon = 0.1;     // spatial cut-off / mollifier width
  double delta = 0.1;       // regularizer of the alignment denominator
  double r_cut = 10.0;      // velocity cutoff radius R

  // When false the pair force is dropped; confinement keeps lambda.
  bool pair_force = true;
  AlignmentIndex alignment = AlignmentIndex::Neighbor;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

namespace detail {

// |x|^d from |x|^2 without a pow() call.
inline double radial_power(double r2, int dim) {
  double out = 1.0;
  for (int k = 0; k < dim / 2; ++k) out *= r2;
  if (dim % 2 != 0) out *= std::sqrt(r2);
  return out;
}

inline double ipow(double base, int exponent) {
  double out = 1.0;
  for (int k = 0; k < exponent; ++k) out *= base;
  return out;
}

// Unnormalized unit bump exp(-1/(1-t2)) for t2 = |y|^2 < 1.
inline double bump(double t2) { return t2 < 1.0 ? std::exp(-1.0 / (1.0 - t2)) : 0.0; }

// |grad| of the unnormalized unit bump as a function of t2 = |y|^2.
inline double bump_grad_norm(double t2) {
  if (t2 >= 1.0) return 0.0;
  const double s = 1.0 - t2;
  return bump(t2) * 2.0 * std::sqrt(t2) / (s * s);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Regularized Newtonian force

/// C_d x / |x|^d outside the ball of radius epsilon, C_d epsilon^-d x inside.
/// Written as C_d x / max(|x|, epsilon)^d.
Vec newtonian_force_reg(std::span<const double> x, const ModelParams& p);

/// The two branches evaluated unconditionally (for continuity checks).
Vec newtonian_force_outer(std::span<const double> x, const ModelParams& p);
Vec newtonian_force_inner(std::span<const double> x, const ModelParams& p);

/// sup |newtonian_force_reg| = C_d epsilon^-(d-1), attained on |x| = epsilon.
double newtonian_force_bound(const ModelParams& p);

/// 3^d C_d.
double envelope_constant(const ModelParams& p);

/// Local Lipschitz modulus q^eps(x) of the regularized force: C_q / |x|^d for
/// |x| >= 3 epsilon and C_q epsilon^-d inside, with C_q = envelope_constant.
double lipschitz_envelope_q(std::span<const double> x, const ModelParams& p);

// ---------------------------------------------------------------------------
// Mollifier phi^eps(x) = epsilon^-d phi(x / epsilon) with the standard bump

/// Z_d = integral of exp(-1/(1-|y|^2)) over the unit ball of R^d.
/// Computed once per dimension by adaptive quadrature and cached.
double mollifier_norm(int dim);

/// sup_y |grad phi(y)| of the normalized unit-scale bump.
double mollifier_grad_sup(int dim);

double mollifier(std::span<const double> x, const ModelParams& p);
Vec mollifier_grad(std::span<const double> x, const ModelParams& p);

/// K_phi epsilon^-(d+1), an upper bound of |mollifier_grad|.
double mollifier_grad_bound(const ModelParams& p);

// ---------------------------------------------------------------------------
// Velocity cutoff phi_R(v) = v h(|v| / R)

struct CutoffJet {
  double value;
  double d1;
  double d2;
};

/// h(r) = 1 for r < 1, 0 for r >= 2, bridged by 1 - S(r - 1) with the
/// quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3. Throws ConfigError on r < 0; NaN passes through.
double cutoff_h(double r);

/// h and its first two derivatives.
CutoffJet cutoff_h_jet(double r);

Vec velocity_cutoff(std::span<const double> v, const ModelParams& p);

// ---------------------------------------------------------------------------
// Confinement and drift

/// grad V for V(x) = |x|^2 / 2.
inline Vec confinement_grad(std::span<const double> x) { return Vec::from(x); }

/// G(x, v) = (gamma + beta) v + lambda grad V(x).
Vec drift_G(std::span<const double> x, std::span<const double> v, const ModelParams& p);

/// max(lambda, gamma + beta): |G(x,v) - G(x',v')| <= L (|x-x'| + |v-v'|).
double drift_lipschitz(const ModelParams& p);

}  // namespace meanfield
