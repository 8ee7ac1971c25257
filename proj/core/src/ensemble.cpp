#include "meanfield/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "meanfield/empirical_measure.hpp"
#include "meanfield/errors.hpp"

namespace meanfield {

PhaseEnsemble::PhaseEnsemble(int dim, std::size_t count)
    : dim_(dim),
      count_(count),
      pos_(static_cast<std::size_t>(dim) * count, 0.0),
      vel_(static_cast<std::size_t>(dim) * count, 0.0) {
  if (count == 0) throw ConfigError("an ensemble needs at least one particle");
  if (dim < 1 || dim > kMaxDim) throw ConfigError("ensemble dimension out of range");
}

Vec PhaseEnsemble::position(std::size_t i) const {
  Vec x(dim_);
  for (int k = 0; k < dim_; ++k) x[k] = pos_[k * count_ + i];
  return x;
}

Vec PhaseEnsemble::velocity(std::size_t i) const {
  Vec v(dim_);
  for (int k = 0; k < dim_; ++k) v[k] = vel_[k * count_ + i];
  return v;
}

void PhaseEnsemble::set_position(std::size_t i, std::span<const double> x) {
  for (int k = 0; k < dim_; ++k) pos_[k * count_ + i] = x[k];
}

void PhaseEnsemble::set_velocity(std::size_t i, std::span<const double> v) {
  for (int k = 0; k < dim_; ++k) vel_[k * count_ + i] = v[k];
}

std::optional<std::size_t> PhaseEnsemble::first_nonfinite() const {
  std::optional<std::size_t> first;
  auto scan = [&](const std::vector<double>& data) {
    for (std::size_t idx = 0; idx < data.size(); ++idx) {
      if (!std::isfinite(data[idx])) {
        const std::size_t i = idx % count_;
        if (!first || i < *first) first = i;
      }
    }
  };
  scan(pos_);
  scan(vel_);
  return first;
}

PhaseEnsemble PhaseEnsemble::head(std::size_t n) const {
  if (n > count_) throw ConfigError("head() larger than ensemble");
  PhaseEnsemble out(dim_, n);
  for (int k = 0; k < dim_; ++k) {
    std::copy_n(position_coord(k).begin(), n, out.position_coord(k).begin());
    std::copy_n(velocity_coord(k).begin(), n, out.velocity_coord(k).begin());
  }
  out.time_ = time_;
  return out;
}

PhaseEnsemble PhaseEnsemble::permuted(std::span<const std::size_t> order) const {
  PhaseEnsemble out(dim_, order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.set_position(i, position(order[i]));
    out.set_velocity(i, velocity(order[i]));
  }
  out.time_ = time_;
  return out;
}

PhaseEnsemble PhaseEnsemble::concat(const PhaseEnsemble& a, const PhaseEnsemble& b) {
  if (a.dim_ != b.dim_) throw ConfigError("concat: dimension mismatch");
  PhaseEnsemble out(a.dim_, a.count_ + b.count_);
  for (int k = 0; k < a.dim_; ++k) {
    auto px = out.position_coord(k);
    auto pv = out.velocity_coord(k);
    std::copy(a.position_coord(k).begin(), a.position_coord(k).end(), px.begin());
    std::copy(b.position_coord(k).begin(), b.position_coord(k).end(), px.begin() + a.count_);
    std::copy(a.velocity_coord(k).begin(), a.velocity_coord(k).end(), pv.begin());
    std::copy(b.velocity_coord(k).begin(), b.velocity_coord(k).end(), pv.begin() + a.count_);
  }
  out.time_ = a.time_;
  return out;
}

InitialLaw InitialLaw::centered(int dim, double position_std, double velocity_std) {
  return {Vec(dim), position_std, Vec(dim), velocity_std};
}

void InitialLaw::validate() const {
  if (position_mean.dim() != velocity_mean.dim()) {
    throw ConfigError("initial law: position and velocity means differ in dimension");
  }
  if (!(position_std > 0.0)) throw ConfigError("position_std must be > 0");
  if (!(velocity_std > 0.0)) throw ConfigError("velocity_std must be > 0");
}

PhaseEnsemble sample_initial(const InitialLaw& law, std::size_t n, std::uint64_t seed) {
  law.validate();
  if (n == 0) throw ConfigError("sample_initial: n must be >= 1");
  const int d = law.position_mean.dim();
  PhaseEnsemble out(d, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec x(d), v(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) x[k] = law.position_mean[k] + law.position_std * normal(rng);
    for (int k = 0; k < d; ++k) v[k] = law.velocity_mean[k] + law.velocity_std * normal(rng);
    out.set_position(i, x);
    out.set_velocity(i, v);
  }
  return out;
}

Vec local_velocity(std::span<const double> x, const PhaseEnsemble& source, const ModelParams& p) {
  return EmpiricalMeasure(source, p).local_velocity(x);
}

Vec convolved_force(std::span<const double> x, const PhaseEnsemble& source, const ModelParams& p) {
  return EmpiricalMeasure(source, p).force(x);
}

double convolved_q(std::span<const double> x, const PhaseEnsemble& source, const ModelParams& p) {
  return p.lambda * EmpiricalMeasure(source, p).envelope_q(x);
}

double convolved_grad_mollifier(std::span<const double> x, const PhaseEnsemble& source,
                                const ModelParams& p) {
  return EmpiricalMeasure(source, p).grad_mollifier(x);
}

std::vector<Vec> default_query_points(const PhaseEnsemble& source, std::size_t max_points) {
  const std::size_t m = source.size();
  const std::size_t stride = std::max<std::size_t>(1, (m + max_points - 1) / max_points);
  std::vector<Vec> points;
  points.reserve(m / stride + 1);
  for (std::size_t i = 0; i < m; i += stride) points.push_back(source.position(i));
  return points;
}

AssumptionReport assumption_estimates(const PhaseEnsemble& source, const ModelParams& p,
                                      std::span<const Vec> query_points,
                                      const AssumptionOptions& options) {
  if (query_points.empty()) throw ConfigError("assumption_estimates: no query points");
  const double sigma = options.sigma > 0.0 ? options.sigma : p.epsilon;
  const double k_cap = options.k_cap > 0.0 ? options.k_cap : detail::ipow(3.0, p.dim);
  const double cap = k_cap / detail::ipow(p.epsilon, p.dim);

  const EmpiricalMeasure measure(source, p);
  const auto n = static_cast<std::ptrdiff_t>(query_points.size());
  std::vector<double> first(query_points.size()), grad(query_points.size()),
      singular(query_points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Vec& x = query_points[static_cast<std::size_t>(i)];
    first[i] = measure.first_moment_density(x, sigma);
    grad[i] = measure.grad_mollifier(x);
    singular[i] = measure.singular_capped(x, cap);
  }
  AssumptionReport report;
  report.sup_first_moment = *std::max_element(first.begin(), first.end());
  report.sup_grad_mollifier_conv = *std::max_element(grad.begin(), grad.end());
  report.sup_singular_conv = *std::max_element(singular.begin(), singular.end());
  report.query_count = query_points.size();
  return report;
}

}  // namespace meanfield
