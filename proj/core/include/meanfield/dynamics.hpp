#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "meanfield/empirical_measure.hpp"
#include "meanfield/ensemble.hpp"
#include "meanfield/kernels.hpp"

namespace meanfield {

/// Particles interact with each other: the N-particle system with cut-off.
struct SelfInteracting {};

/// Particles feel the field of a separate source ensemble, the empirical
/// proxy of the mean-field law. The source must outlive the mode.
struct Reference {
  std::reference_wrapper<const PhaseEnsemble> source;
};

using ForceMode = std::variant<SelfInteracting, Reference>;

enum class Scheme { RK4, Euler };

/// 0.1 min(1 / (lambda C_d eps^-(d-1)), 1 / (gamma + beta + lambda)).
double dt_max(const ModelParams& p);

/// Largest dt = t_end / k (k integer) that respects dt_max.
double guarded_dt(double t_end, const ModelParams& p);

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::RK4;
  std::size_t snapshot_stride = 1;

  /// round(t_end / dt).
  std::size_t steps() const;
  /// dt > 0, t_end >= 0, steps * dt == t_end within 1e-12, dt <= dt_max(p),
  /// stride >= 1. Throws ConfigError.
  void validate(const ModelParams& p) const;
};

/// dv_i/dt for particle i: pair force, damping/confinement drift and local
/// alignment, with the j = i term included in every sum.
Vec acceleration(std::size_t i, const PhaseEnsemble& state, const ForceMode& mode,
                 const ModelParams& p);

/// Accelerations of all targets in the field of `measure`, written
/// coordinate-major into out (size dim * targets.size()). Parallel over i.
void accelerations(const PhaseEnsemble& targets, const EmpiricalMeasure& measure,
                   const ModelParams& p, std::span<double> out);

/// One time step. In Reference mode the source ensemble is advanced alongside
/// the state within the step (its own self-interacting stages drive the
/// matching stages of the state) and then discarded; use step_lockstep to
/// keep it. Throws IntegrationError naming the first non-finite particle.
PhaseEnsemble step(const PhaseEnsemble& state, const ForceMode& mode, const ModelParams& p,
                   double dt, Scheme scheme = Scheme::RK4);

struct LockstepState {
  PhaseEnsemble test;
  PhaseEnsemble reference;
};

/// Advances the reference ensemble (self-interacting) and the test particles
/// (driven by the reference) through one step on a shared stage grid.
LockstepState step_lockstep(const PhaseEnsemble& test, const PhaseEnsemble& reference,
                            const ModelParams& p, double dt, Scheme scheme = Scheme::RK4);

/// Snapshots every cfg.snapshot_stride steps, always including t = 0 and
/// t_end. A Reference source is copied and advanced in lockstep.
std::vector<PhaseEnsemble> evolve(const PhaseEnsemble& state, const ForceMode& mode,
                                  const ModelParams& p, const IntegratorConfig& cfg);

/// One ensemble CSV per snapshot plus `index.csv` with columns t,path.
void write_trajectory(const std::filesystem::path& dir,
                      const std::vector<PhaseEnsemble>& snapshots);

}  // namespace meanfield
