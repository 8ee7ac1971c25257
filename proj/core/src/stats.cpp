#include "meanfield/stats.hpp"

#include <cmath>
#include <vector>

#include "meanfield/errors.hpp"

namespace meanfield {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

Interval wilson_interval(std::size_t hits, std::size_t trials, double z) {
  if (trials == 0) throw ConfigError("wilson_interval: zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {center, half};
}

MeanWithError jackknife_mean(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw ConfigError("jackknife_mean needs at least two values");
  double total = 0.0;
  for (double v : values) total += v;
  const double mean = total / static_cast<double>(n);
  // leave-one-out means theta_i = (total - v_i) / (n - 1)
  double ss = 0.0;
  for (double v : values) {
    const double loo = (total - v) / static_cast<double>(n - 1);
    ss += (loo - mean) * (loo - mean);
  }
  const double se = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
  return {mean, se};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("loglog_slope: need >= 2 pairs");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("loglog_slope: non-positive value");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace meanfield
