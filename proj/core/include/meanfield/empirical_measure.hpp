#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "meanfield/ensemble.hpp"
#include "meanfield/kernels.hpp"
#include "meanfield/vec.hpp"

namespace meanfield {

/// Evaluation view of a PhaseEnsemble as an empirical measure. Caches the
/// cut-off velocities phi_R(v_j) once so that repeated queries cost one pass
/// over the source positions.
///
/// The referenced ensemble must outlive the view. Queries are const and safe
/// to call concurrently. Every j-sum runs in a fixed order that depends only
/// on the source size, never on the thread count.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(const PhaseEnsemble& source, const ModelParams& p);

  std::size_t size() const { return source_->size(); }
  const ModelParams& params() const { return params_; }

  /// (1/M) sum_j grad W^eps(x - x_j)
  Vec force(std::span<const double> x) const;
  /// (1/M) sum_j q^eps(x - x_j)
  double envelope_q(std::span<const double> x) const;
  /// (1/M) sum_j |grad phi^eps(x - x_j)|
  double grad_mollifier(std::span<const double> x) const;

  struct Alignment {
    Vec momentum;    // (1/M) sum_j phi_R(v_j) phi^eps(x - x_j)
    double density;  // (1/M) sum_j phi^eps(x - x_j)
  };
  Alignment alignment(std::span<const double> x) const;

  struct Interaction {
    Vec force;  // as force(x)
    Alignment alignment;
  };
  /// force(x) and alignment(x) together.
  Interaction interaction(std::span<const double> x) const;

  /// momentum / (density + delta)
  Vec local_velocity(std::span<const double> x) const;
  /// phi_R(v_self) density / (density + delta)
  Vec local_velocity_self(std::span<const double> x, std::span<const double> v_self) const;

  /// (1/M) sum_j min(|x - x_j|^-d, cap)
  double singular_capped(std::span<const double> x, double cap) const;
  /// (1/M) sum_j |v_j| phi^sigma(x - x_j)
  double first_moment_density(std::span<const double> x, double sigma) const;

 private:
  const PhaseEnsemble* source_;
  ModelParams params_;
  std::vector<double> cut_velocity_;  // coordinate-major phi_R(v_j)
  double mollifier_scale_;            // 1 / (Z_d eps^d)
};

}  // namespace meanfield
