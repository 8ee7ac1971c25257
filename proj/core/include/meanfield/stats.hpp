#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace meanfield {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based child seed: a pure function of (master, stream, index), so
/// trial k gets the same seed no matter how trials are scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

struct Interval {
  double center;
  double halfwidth;
};

/// Wilson score interval for hits out of trials (z = 1.96 by default).
Interval wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054);

struct MeanWithError {
  double mean;
  double std_error;
};

/// Sample mean with its delete-one jackknife standard error.
MeanWithError jackknife_mean(std::span<const double> values);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace meanfield
