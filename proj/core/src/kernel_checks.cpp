#include "meanfield/kernel_checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "meanfield/errors.hpp"

namespace meanfield {
namespace {

class Sampler {
 public:
  Sampler(int dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

  Vec direction() {
    Vec u(dim_);
    do {
      for (int k = 0; k < dim_; ++k) u[k] = normal_(rng_);
    } while (u.norm2() == 0.0);
    return u * (1.0 / u.norm());
  }

  // Uniform in the ball of the given radius.
  Vec in_ball(double radius) {
    return direction() * (radius * std::pow(uniform_(rng_), 1.0 / dim_));
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(rng_); }

 private:
  int dim_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

struct Tally {
  PropertyCheck check;

  Tally(std::string name, double tolerance) {
    check.name = std::move(name);
    check.tolerance = tolerance;
  }
  void add(double ratio) {
    ++check.samples;
    check.max_ratio = std::max(check.max_ratio, ratio);
    if (!(ratio <= check.tolerance)) ++check.violations;
  }
};

}  // namespace

double mollifier_mass(const ModelParams& p, int points_per_axis) {
  p.validate();
  if (points_per_axis < 2) throw ConfigError("mollifier_mass: need at least 2 points per axis");
  const int d = p.dim;
  const double h = 2.0 * p.epsilon / (points_per_axis - 1);
  // Endpoints carry zero weight since the bump vanishes there.
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(points_per_axis);
  double sum = 0.0;
  Vec x(d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int k = 0; k < d; ++k) {
      x[k] = -p.epsilon + h * static_cast<double>(rest % points_per_axis);
      rest /= points_per_axis;
    }
    sum += mollifier(x, p);
  }
  return sum * detail::ipow(h, d);
}

std::vector<PropertyCheck> kernel_property_suite(const ModelParams& p,
                                                 const KernelCheckOptions& options) {
  p.validate();
  const int d = p.dim;
  const double eps = p.epsilon;
  const std::size_t n = options.samples;
  std::vector<PropertyCheck> out;

  {
    Sampler s(d, options.seed ^ 0x1);
    Tally bound("force_bound", 1.0 + 1e-9);
    Tally attained("force_bound_attained", 1.0);
    const double cap = newtonian_force_bound(p);
    double best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      bound.add(newtonian_force_reg(s.in_ball(4.0 * eps), p).norm() / cap);
      const Vec near = s.direction() * (eps * (1.0 + s.uniform(-1e-3, 1e-3)));
      best = std::max(best, newtonian_force_reg(near, p).norm() / cap);
    }
    // ratio of the 0.999 target to the best value seen near the sphere
    attained.check.samples = n;
    attained.check.max_ratio = best > 0.0 ? 0.999 / best : INFINITY;
    attained.check.violations = attained.check.max_ratio <= 1.0 ? 0 : 1;
    out.push_back(bound.check);
    out.push_back(attained.check);
  }
  {
    Sampler s(d, options.seed ^ 0x2);
    Tally t("branch_continuity", 1e-12);
    for (std::size_t k = 0; k < std::min<std::size_t>(n, 1000); ++k) {
      const Vec x = s.direction() * eps;
      const Vec inner = newtonian_force_inner(x, p);
      t.add((newtonian_force_outer(x, p) - inner).norm() / inner.norm());
    }
    out.push_back(t.check);
  }
  {
    Sampler s(d, options.seed ^ 0x3);
    Tally t("lipschitz_envelope", 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec x = s.in_ball(8.0 * eps);
      const Vec y = x + s.direction() * s.uniform(1e-9 * eps, 2.0 * eps);
      const double lhs = (newtonian_force_reg(x, p) - newtonian_force_reg(y, p)).norm();
      t.add(lhs / (lipschitz_envelope_q(x, p) * (x - y).norm()));
    }
    out.push_back(t.check);
  }
  {
    Sampler s(d, options.seed ^ 0x4);
    Tally t("mollifier_grad_bound", 1.0 + 1e-9);
    const double cap = mollifier_grad_bound(p);
    for (std::size_t k = 0; k < n; ++k) t.add(mollifier_grad(s.in_ball(eps), p).norm() / cap);
    out.push_back(t.check);
  }
  if (d <= 3) {
    Tally t("mollifier_mass", 1.0);
    const int points = d == 2 ? options.quadrature_points : options.quadrature_points / 2;
    t.add(std::abs(mollifier_mass(p, points) - 1.0) / 1e-8);
    out.push_back(t.check);
  }
  {
    Sampler s(d, options.seed ^ 0x5);
    Tally t("velocity_cutoff_bound", 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      t.add(velocity_cutoff(s.in_ball(3.0 * p.r_cut), p).norm() / (2.0 * p.r_cut));
    }
    out.push_back(t.check);
  }
  {
    Sampler s(d, options.seed ^ 0x6);
    Tally t("drift_lipschitz", 1.0 + 1e-12);
    const double lip = drift_lipschitz(p);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec x = s.in_ball(10.0), v = s.in_ball(10.0);
      const Vec x2 = s.in_ball(10.0), v2 = s.in_ball(10.0);
      const double rhs = lip * ((x - x2).norm() + (v - v2).norm());
      if (rhs > 0.0) t.add((drift_G(x, v, p) - drift_G(x2, v2, p)).norm() / rhs);
    }
    out.push_back(t.check);
  }
  return out;
}

}  // namespace meanfield
