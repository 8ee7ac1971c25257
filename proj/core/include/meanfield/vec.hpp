#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <span>

namespace meanfield {

inline constexpr int kMaxDim = 8;

/// Fixed-capacity vector in R^d, d <= kMaxDim. Used for points, velocities
/// and forces so that pointwise kernels never allocate.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int dim) : dim_(dim) { assert(dim >= 0 && dim <= kMaxDim); }
  Vec(std::initializer_list<double> values) : dim_(static_cast<int>(values.size())) {
    assert(dim_ <= kMaxDim);
    std::copy(values.begin(), values.end(), c_.begin());
  }

  static Vec from(std::span<const double> values) {
    Vec v(static_cast<int>(values.size()));
    std::copy(values.begin(), values.end(), v.c_.begin());
    return v;
  }

  int dim() const { return dim_; }
  double& operator[](int k) { return c_[k]; }
  double operator[](int k) const { return c_[k]; }

  std::span<const double> span() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  std::span<double> span() { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  operator std::span<const double>() const { return span(); }

  double norm2() const {
    double s = 0.0;
    for (int k = 0; k < dim_; ++k) s += c_[k] * c_[k];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }
  double max_abs() const {
    double m = 0.0;
    for (int k = 0; k < dim_; ++k) m = std::max(m, std::abs(c_[k]));
    return m;
  }

  Vec& operator+=(const Vec& o) {
    for (int k = 0; k < dim_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int k = 0; k < dim_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int k = 0; k < dim_; ++k) c_[k] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator-(Vec a) { return a *= -1.0; }
  friend bool operator==(const Vec& a, const Vec& b) {
    return a.dim_ == b.dim_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

inline double norm(std::span<const double> x) { return std::sqrt(norm2(x)); }

}  // namespace meanfield
