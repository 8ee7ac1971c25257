#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace meanfield {

/// Exponents of the mean-field convergence theorem. gamma_exp is the
/// concentration exponent, unrelated to the damping gamma_damp.
struct ExponentSet {
  double theta = 0.04;
  double vartheta = 0.02;
  double alpha = 0.06;
  double kappa = 0.12;
  double gamma_exp = 0.05;
  double eta = 0.12;
  double mu = 0.05;
};

struct ScaledParams {
  double epsilon;  // N^-theta
  double delta;    // 1 / sqrt(vartheta ln N)
  double r_cut;    // 1 / delta
};

/// Throws ConfigError when n < 2 or theta, vartheta are not positive.
ScaledParams derive_scaling(double n, double theta, double vartheta);

struct Constraint {
  std::string name;
  double lower;
  double value;
  double upper;
  bool ok;
};

struct ScalingReport {
  int dim = 2;
  std::vector<Constraint> constraints;
  std::vector<std::string> violations;  // e.g. "alpha_upper"
  bool valid = false;                   // violations.empty()

  // Only filled when the set is valid.
  std::array<double, 6> n_terms{};
  double n_rate = 0.0;
  // Findings about the theorem itself rather than the input, e.g. a valid
  // set whose rate n is not positive.
  std::vector<std::string> discrepancies;

  // N-dependent fields, filled by scaling_report().
  double n_particles = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double r_cut = 0.0;
};

/// Checks every open interval strictly, comparing the exact rationals given by
/// the shortest decimal form of each exponent. d < 2 is a ConfigError.
ScalingReport validate_exponents(int dim, const ExponentSet& e);

/// The six rate expressions; throws ConfigError if the set does not validate.
std::array<double, 6> n_terms(int dim, const ExponentSet& e);
/// Their minimum.
double compute_n(int dim, const ExponentSet& e);

/// validate_exponents plus derive_scaling at N.
ScalingReport scaling_report(int dim, double n, const ExponentSet& e);

/// C exp((C + C vartheta ln N) t) N^-n.
double theoretical_bound(double n_particles, double t, double c_const, double vartheta,
                         double n_rate);

struct VarthetaAdmissibility {
  double upper;  // min(n / (C t), theta)
  bool admissible;
};

/// Reported for a user-supplied C, never asserted.
VarthetaAdmissibility vartheta_admissibility(double n_rate, double c_const, double t,
                                             const ExponentSet& e);

}  // namespace meanfield
