#include "meanfield/empirical_measure.hpp"

#include "bump_batch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <type_traits>

namespace meanfield {
namespace {

// Pair sums that vectorize are split over kLanes interleaved accumulators:
// lane l receives j = l, l + kLanes, ...; the remainder goes to lane 0 and
// the lanes are combined as (0 + 1) + (2 + 3). The order depends only on M.
constexpr std::size_t kLanes = 4;

using Coords = std::array<const double*, kMaxDim>;

Coords coord_pointers(const PhaseEnsemble& e) {
  Coords c{};
  for (int k = 0; k < e.dim(); ++k) c[k] = e.position_coord(k).data();
  return c;
}

template <typename F>
decltype(auto) dispatch_dim(int dim, F&& f) {
  switch (dim) {
    case 2: return f(std::integral_constant<int, 2>{});
    case 3: return f(std::integral_constant<int, 3>{});
    default: return f(std::integral_constant<int, 0>{});
  }
}

template <int D>
Vec force_sum(const Coords& xs, std::size_t m, int dim, std::span<const double> x, double eps2) {
  const int d = D > 0 ? D : dim;
  double acc[kMaxDim][kLanes] = {};
  double q[kMaxDim];
  for (int k = 0; k < d; ++k) q[k] = x[k];

  auto body = [&](std::size_t j, std::size_t lane) {
    double dx[kMaxDim];
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      dx[k] = q[k] - xs[k][j];
      r2 += dx[k] * dx[k];
    }
    const double inv = 1.0 / detail::radial_power(std::max(r2, eps2), d);
    for (int k = 0; k < d; ++k) acc[k][lane] += dx[k] * inv;
  };

  std::size_t j = 0;
  for (; j + kLanes <= m; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) body(j + l, l);
  }
  for (; j < m; ++j) body(j, 0);

  Vec out(d);
  for (int k = 0; k < d; ++k) out[k] = (acc[k][0] + acc[k][1]) + (acc[k][2] + acc[k][3]);
  return out;
}

template <int D>
double envelope_sum(const Coords& xs, std::size_t m, int dim, std::span<const double> x,
                    double eps2, double inner_value) {
  const int d = D > 0 ? D : dim;
  const double boundary = 9.0 * eps2;
  double acc[kLanes] = {};
  double q[kMaxDim];
  for (int k = 0; k < d; ++k) q[k] = x[k];

  auto body = [&](std::size_t j, std::size_t lane) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double dx = q[k] - xs[k][j];
      r2 += dx * dx;
    }
    const double outer = 1.0 / detail::radial_power(r2, d);
    acc[lane] += r2 >= boundary ? outer : inner_value;
  };

  std::size_t j = 0;
  for (; j + kLanes <= m; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) body(j + l, l);
  }
  for (; j < m; ++j) body(j, 0);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

template <int D>
double capped_sum(const Coords& xs, std::size_t m, int dim, std::span<const double> x,
                  double floor_power) {
  const int d = D > 0 ? D : dim;
  double acc[kLanes] = {};
  double q[kMaxDim];
  for (int k = 0; k < d; ++k) q[k] = x[k];

  auto body = [&](std::size_t j, std::size_t lane) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double dx = q[k] - xs[k][j];
      r2 += dx * dx;
    }
    acc[lane] += 1.0 / std::max(detail::radial_power(r2, d), floor_power);
  };

  std::size_t j = 0;
  for (; j + kLanes <= m; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) body(j + l, l);
  }
  for (; j < m; ++j) body(j, 0);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

// Sum over the support of the bump: accumulate(j, w, t2) receives
// t2 = |x - x_j|^2 / h^2 < 1 and w = exp(-1/(1-t2)), in increasing j.
// Distances and weights are computed a block at a time so both vectorize.
template <int D, typename Accumulate>
void bump_pass(const Coords& xs, std::size_t m, int dim, std::span<const double> x, double h2,
               Accumulate&& accumulate) {
  constexpr std::size_t kBlock = 256;
  const int d = D > 0 ? D : dim;
  double q[kMaxDim];
  for (int k = 0; k < d; ++k) q[k] = x[k];
  const double inv_h2 = 1.0 / h2;
  alignas(64) double t2[kBlock];
  alignas(64) double packed[kBlock];
  alignas(64) double w[kBlock];
  std::uint32_t hit[kBlock];
  for (std::size_t base = 0; base < m; base += kBlock) {
    const std::size_t len = std::min(kBlock, m - base);
    for (std::size_t l = 0; l < len; ++l) {
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double dx = q[k] - xs[k][base + l];
        r2 += dx * dx;
      }
      t2[l] = r2 * inv_h2;
    }
    std::size_t count = 0;
    for (std::size_t l = 0; l < len; ++l) {
      hit[count] = static_cast<std::uint32_t>(l);
      count += t2[l] < 1.0;
    }
    for (std::size_t c = 0; c < count; ++c) packed[c] = t2[hit[c]];
    detail::bump_batch(packed, w, count);
    for (std::size_t c = 0; c < count; ++c) accumulate(base + hit[c], w[c], packed[c]);
  }
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(const PhaseEnsemble& source, const ModelParams& p)
    : source_(&source),
      params_(p),
      cut_velocity_(source.velocities_raw().begin(), source.velocities_raw().end()),
      mollifier_scale_(1.0 / (mollifier_norm(p.dim) * detail::ipow(p.epsilon, p.dim))) {
  const std::size_t m = source.size();
  const int d = source.dim();
  for (std::size_t j = 0; j < m; ++j) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double v = cut_velocity_[k * m + j];
      r2 += v * v;
    }
    const double h = cutoff_h(std::sqrt(r2) / p.r_cut);
    for (int k = 0; k < d; ++k) cut_velocity_[k * m + j] *= h;
  }
}

Vec EmpiricalMeasure::force(std::span<const double> x) const {
  const Coords xs = coord_pointers(*source_);
  const std::size_t m = source_->size();
  const double eps2 = params_.epsilon * params_.epsilon;
  Vec sum = dispatch_dim(params_.dim, [&](auto tag) {
    return force_sum<decltype(tag)::value>(xs, m, params_.dim, x, eps2);
  });
  return sum * (params_.c_d / static_cast<double>(m));
}

double EmpiricalMeasure::envelope_q(std::span<const double> x) const {
  const Coords xs = coord_pointers(*source_);
  const std::size_t m = source_->size();
  const double eps2 = params_.epsilon * params_.epsilon;
  const double inner = 1.0 / detail::ipow(params_.epsilon, params_.dim);
  const double sum = dispatch_dim(params_.dim, [&](auto tag) {
    return envelope_sum<decltype(tag)::value>(xs, m, params_.dim, x, eps2, inner);
  });
  return envelope_constant(params_) * sum / static_cast<double>(m);
}

double EmpiricalMeasure::grad_mollifier(std::span<const double> x) const {
  const Coords xs = coord_pointers(*source_);
  const std::size_t m = source_->size();
  const double eps2 = params_.epsilon * params_.epsilon;
  double sum = 0.0;
  dispatch_dim(params_.dim, [&](auto tag) {
    bump_pass<decltype(tag)::value>(
        xs, m, params_.dim, x, eps2, [&](std::size_t, double w, double t2) {
          const double s = 1.0 - t2;
          sum += w * 2.0 * std::sqrt(t2) / (s * s);
        });
  });
  return sum * mollifier_scale_ / params_.epsilon / static_cast<double>(m);
}

EmpiricalMeasure::Alignment EmpiricalMeasure::alignment(std::span<const double> x) const {
  const Coords xs = coord_pointers(*source_);
  const std::size_t m = source_->size();
  const int d = params_.dim;
  const double eps2 = params_.epsilon * params_.epsilon;
  double density = 0.0;
  double momentum[kMaxDim] = {};
  const double* cv = cut_velocity_.data();
  dispatch_dim(d, [&](auto tag) {
    constexpr int D = decltype(tag)::value;
    const int dd = D > 0 ? D : d;
    bump_pass<D>(xs, m, d, x, eps2, [&](std::size_t j, double w, double) {
      density += w;
      for (int k = 0; k < dd; ++k) momentum[k] += w * cv[k * m + j];
    });
  });
  const double scale = mollifier_scale_ / static_cast<double>(m);
  Alignment out{Vec(d), density * scale};
  for (int k = 0; k < d; ++k) out.momentum[k] = momentum[k] * scale;
  return out;
}

EmpiricalMeasure::Interaction EmpiricalMeasure::interaction(std::span<const double> x) const {
  return {force(x), alignment(x)};
}

Vec EmpiricalMeasure::local_velocity(std::span<const double> x) const {
  const Alignment a = alignment(x);
  return a.momentum * (1.0 / (a.density + params_.delta));
}

Vec EmpiricalMeasure::local_velocity_self(std::span<const double> x,
                                          std::span<const double> v_self) const {
  const Alignment a = alignment(x);
  return velocity_cutoff(v_self, params_) * (a.density * (1.0 / (a.density + params_.delta)));
}

double EmpiricalMeasure::singular_capped(std::span<const double> x, double cap) const {
  const Coords xs = coord_pointers(*source_);
  const std::size_t m = source_->size();
  const double sum = dispatch_dim(params_.dim, [&](auto tag) {
    return capped_sum<decltype(tag)::value>(xs, m, params_.dim, x, 1.0 / cap);
  });
  return sum / static_cast<double>(m);
}

double EmpiricalMeasure::first_moment_density(std::span<const double> x, double sigma) const {
  const Coords xs = coord_pointers(*source_);
  const std::size_t m = source_->size();
  const int d = params_.dim;
  const auto vel = source_->velocities_raw();
  double sum = 0.0;
  dispatch_dim(d, [&](auto tag) {
    bump_pass<decltype(tag)::value>(
        xs, m, d, x, sigma * sigma, [&](std::size_t j, double w, double) {
          double v2 = 0.0;
          for (int k = 0; k < d; ++k) v2 += vel[k * m + j] * vel[k * m + j];
          sum += w * std::sqrt(v2);
        });
  });
  return sum / (mollifier_norm(d) * detail::ipow(sigma, d)) / static_cast<double>(m);
}

}  // namespace meanfield
