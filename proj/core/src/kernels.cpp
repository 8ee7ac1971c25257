#include "meanfield/kernels.hpp"

#include <array>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "meanfield/errors.hpp"

namespace meanfield {

void ModelParams::validate() const {
  if (dim < 2) throw ConfigError("d must satisfy d >= 2 (got " + std::to_string(dim) + ")");
  if (dim > kMaxDim) throw ConfigError("d must not exceed " + std::to_string(kMaxDim));
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ConfigError(std::string(name) + " must be finite and > 0 (got " +
                        std::to_string(value) + ")");
    }
  };
  auto non_negative = [](double value, const char* name) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ConfigError(std::string(name) + " must be finite and >= 0 (got " +
                        std::to_string(value) + ")");
    }
  };
  non_negative(lambda, "lambda");
  non_negative(beta, "beta");
  positive(gamma_damp, "gamma_damp");
  positive(c_d, "c_d");
  positive(epsilon, "epsilon");
  positive(delta, "delta");
  positive(r_cut, "r_cut");
}

Vec newtonian_force_reg(std::span<const double> x, const ModelParams& p) {
  const double eps2 = p.epsilon * p.epsilon;
  const double factor = p.c_d / detail::radial_power(std::max(norm2(x), eps2), p.dim);
  return factor * Vec::from(x);
}

Vec newtonian_force_outer(std::span<const double> x, const ModelParams& p) {
  return (p.c_d / detail::radial_power(norm2(x), p.dim)) * Vec::from(x);
}

Vec newtonian_force_inner(std::span<const double> x, const ModelParams& p) {
  return (p.c_d / detail::ipow(p.epsilon, p.dim)) * Vec::from(x);
}

double newtonian_force_bound(const ModelParams& p) {
  return p.c_d / detail::ipow(p.epsilon, p.dim - 1);
}

double envelope_constant(const ModelParams& p) { return detail::ipow(3.0, p.dim) * p.c_d; }

double lipschitz_envelope_q(std::span<const double> x, const ModelParams& p) {
  const double r2 = norm2(x);
  const double inner = 9.0 * p.epsilon * p.epsilon;
  if (r2 >= inner) return envelope_constant(p) / detail::radial_power(r2, p.dim);
  return envelope_constant(p) / detail::ipow(p.epsilon, p.dim);
}

namespace {

double unit_sphere_area(int dim) {
  const double half = 0.5 * dim;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

struct BumpConstants {
  std::array<double, kMaxDim + 1> norm{};
  std::array<double, kMaxDim + 1> grad_sup{};
};

const BumpConstants& bump_constants() {
  static const BumpConstants constants = [] {
    BumpConstants c;
    using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (int d = 1; d <= kMaxDim; ++d) {
      auto radial = [d](double r) { return detail::bump(r * r) * detail::ipow(r, d - 1); };
      double error = 0.0;
      const double integral = Quadrature::integrate(radial, 0.0, 1.0, 20, 1e-13, &error);
      c.norm[d] = unit_sphere_area(d) * integral;

      auto negative_grad = [](double r) { return -detail::bump_grad_norm(r * r); };
      const auto [r_star, value] =
          boost::math::tools::brent_find_minima(negative_grad, 0.0, 1.0, 52);
      (void)r_star;
      c.grad_sup[d] = -value / c.norm[d];
    }
    return c;
  }();
  return constants;
}

}  // namespace

double mollifier_norm(int dim) { return bump_constants().norm.at(static_cast<std::size_t>(dim)); }

double mollifier_grad_sup(int dim) {
  return bump_constants().grad_sup.at(static_cast<std::size_t>(dim));
}

double mollifier(std::span<const double> x, const ModelParams& p) {
  const double t2 = norm2(x) / (p.epsilon * p.epsilon);
  if (t2 >= 1.0) return 0.0;
  return detail::bump(t2) / (mollifier_norm(p.dim) * detail::ipow(p.epsilon, p.dim));
}

Vec mollifier_grad(std::span<const double> x, const ModelParams& p) {
  const double eps2 = p.epsilon * p.epsilon;
  const double t2 = norm2(x) / eps2;
  Vec out(p.dim);
  if (t2 >= 1.0) return out;
  const double s = 1.0 - t2;
  // grad of exp(-1/(1-|y|^2)) is -2y/(1-|y|^2)^2 times the bump; y = x/eps
  const double scale = -2.0 * detail::bump(t2) / (s * s) /
                       (mollifier_norm(p.dim) * detail::ipow(p.epsilon, p.dim) * eps2);
  for (int k = 0; k < p.dim; ++k) out[k] = scale * x[k];
  return out;
}

double mollifier_grad_bound(const ModelParams& p) {
  return mollifier_grad_sup(p.dim) / detail::ipow(p.epsilon, p.dim + 1);
}

CutoffJet cutoff_h_jet(double r) {
  if (std::isnan(r)) return {r, r, r};
  if (r < 0.0) throw ConfigError("cutoff_h requires r >= 0");
  if (r < 1.0) return {1.0, 0.0, 0.0};
  if (r >= 2.0) return {0.0, 0.0, 0.0};
  const double t = r - 1.0;
  const double t2 = t * t;
  const double s = t2 * t * (10.0 + t * (-15.0 + 6.0 * t));
  const double s1 = 30.0 * t2 * (1.0 - t) * (1.0 - t);
  const double s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
  return {1.0 - s, -s1, -s2};
}

double cutoff_h(double r) { return cutoff_h_jet(r).value; }

Vec velocity_cutoff(std::span<const double> v, const ModelParams& p) {
  return cutoff_h(norm(v) / p.r_cut) * Vec::from(v);
}

Vec drift_G(std::span<const double> x, std::span<const double> v, const ModelParams& p) {
  return (p.gamma_damp + p.beta) * Vec::from(v) + p.lambda * confinement_grad(x);
}

double drift_lipschitz(const ModelParams& p) {
  return std::max(p.lambda, p.gamma_damp + p.beta);
}

}  // namespace meanfield
