#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "meanfield/kernels.hpp"
#include "meanfield/vec.hpp"

namespace meanfield {

/// Positions and velocities of a finite particle collection. Also serves as
/// an empirical measure (1/M) sum_j delta_{(x_j, v_j)}.
///
/// Storage is coordinate-major: all first coordinates, then all second
/// coordinates, and so on, so that pair loops over j read contiguous memory.
class PhaseEnsemble {
 public:
  PhaseEnsemble() = default;
  /// Zero-initialized ensemble; throws ConfigError when count == 0.
  PhaseEnsemble(int dim, std::size_t count);

  int dim() const { return dim_; }
  std::size_t size() const { return count_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::span<const double> position_coord(int k) const {
    return {pos_.data() + static_cast<std::size_t>(k) * count_, count_};
  }
  std::span<double> position_coord(int k) {
    return {pos_.data() + static_cast<std::size_t>(k) * count_, count_};
  }
  std::span<const double> velocity_coord(int k) const {
    return {vel_.data() + static_cast<std::size_t>(k) * count_, count_};
  }
  std::span<double> velocity_coord(int k) {
    return {vel_.data() + static_cast<std::size_t>(k) * count_, count_};
  }

  Vec position(std::size_t i) const;
  Vec velocity(std::size_t i) const;
  void set_position(std::size_t i, std::span<const double> x);
  void set_velocity(std::size_t i, std::span<const double> v);

  /// Raw coordinate-major storage, positions then velocities.
  std::span<const double> positions_raw() const { return pos_; }
  std::span<const double> velocities_raw() const { return vel_; }
  std::span<double> positions_raw() { return pos_; }
  std::span<double> velocities_raw() { return vel_; }

  /// Index of the first particle with a non-finite coordinate.
  std::optional<std::size_t> first_nonfinite() const;

  /// The first n particles.
  PhaseEnsemble head(std::size_t n) const;
  /// Particles reordered so that result[i] = this[order[i]].
  PhaseEnsemble permuted(std::span<const std::size_t> order) const;
  /// Particles of a followed by particles of b.
  static PhaseEnsemble concat(const PhaseEnsemble& a, const PhaseEnsemble& b);

  friend bool operator==(const PhaseEnsemble&, const PhaseEnsemble&) = default;

 private:
  int dim_ = 0;
  std::size_t count_ = 0;
  std::vector<double> pos_;
  std::vector<double> vel_;
  double time_ = 0.0;
};

/// Isotropic Gaussian product law g_x (x) g_v for i.i.d. initial data.
struct InitialLaw {
  Vec position_mean;
  double position_std = 1.0;
  Vec velocity_mean;
  double velocity_std = 1.0;

  /// Centered law in dimension d.
  static InitialLaw centered(int dim, double position_std, double velocity_std);
  void validate() const;
};

/// n i.i.d. draws from law; deterministic given seed. Throws ConfigError
/// when n == 0.
PhaseEnsemble sample_initial(const InitialLaw& law, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Empirical-measure queries. Each sums over all source particles in index
// order; no source particle is skipped.

/// (1/M) sum_j phi_R(v_j) phi^eps(x - x_j) / ((1/M) sum_j phi^eps(x - x_j) + delta).
Vec local_velocity(std::span<const double> x, const PhaseEnsemble& source, const ModelParams& p);

/// (1/M) sum_j grad W^eps(x - x_j).
Vec convolved_force(std::span<const double> x, const PhaseEnsemble& source, const ModelParams& p);

/// lambda (1/M) sum_j q^eps(x - x_j).
double convolved_q(std::span<const double> x, const PhaseEnsemble& source, const ModelParams& p);

/// (1/M) sum_j |grad phi^eps(x - x_j)|.
double convolved_grad_mollifier(std::span<const double> x, const PhaseEnsemble& source,
                                const ModelParams& p);

/// Empirical probes of the three uniform bounds assumed on the mean-field law.
struct AssumptionReport {
  double sup_first_moment = 0.0;         // sup_x int |v| f dv, mollified at bandwidth sigma
  double sup_grad_mollifier_conv = 0.0;  // sup_x int |grad phi^eps(x-y)| f
  double sup_singular_conv = 0.0;        // sup_x int min(|x-y|^-d, K_cap eps^-d) f
  std::size_t query_count = 0;
};

struct AssumptionOptions {
  double sigma = 0.0;   // first-moment bandwidth; 0 means epsilon
  double k_cap = 0.0;   // singular cap multiplier; 0 means 3^d
};

/// Source positions subsampled with a fixed stride to at most max_points.
std::vector<Vec> default_query_points(const PhaseEnsemble& source, std::size_t max_points = 4096);

/// Throws ConfigError when query_points is empty.
AssumptionReport assumption_estimates(const PhaseEnsemble& source, const ModelParams& p,
                                      std::span<const Vec> query_points,
                                      const AssumptionOptions& options = {});

}  // namespace meanfield
