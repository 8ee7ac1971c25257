#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "meanfield/dynamics.hpp"
#include "meanfield/ensemble.hpp"
#include "meanfield/kernels.hpp"
#include "meanfield/scaling.hpp"

namespace meanfield {

/// Pathwise distance between the N-particle system and N mean-field
/// trajectories started from the same initial data.
struct DeviationRecord {
  std::uint64_t trial_seed = 0;
  std::size_t n_particles = 0;
  double alpha = 0.0;
  std::vector<double> times;
  // Running sup over s <= t of the max-norm distance on R^{2dN}.
  std::vector<double> sup_deviation;
  // min(1, N^alpha sup_deviation).
  std::vector<double> s_process;

  double final_sup() const { return sup_deviation.back(); }
};

/// max_i max_k max(|x_ik - y_ik|, |v_ik - w_ik|)
double max_norm_distance(const PhaseEnsemble& a, const PhaseEnsemble& b);

/// One coupled trial. Draws m particles from law with `seed`; the first n are
/// the shared initial data of (i) the n-particle self-interacting system and
/// (ii) n test trajectories driven by the m-particle reference ensemble,
/// which evolves self-interacting as the mean-field proxy. The test
/// trajectories do not act on the reference. Requires m >= n.
DeviationRecord run_coupled_trial(std::size_t n, std::size_t m, const InitialLaw& law,
                                  const ModelParams& p, const IntegratorConfig& cfg,
                                  double alpha, std::uint64_t seed);

struct ExceedanceEstimate {
  std::size_t n_particles = 0;
  double alpha = 0.0;
  double threshold = 0.0;  // N^-alpha
  std::size_t trials = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  double ci_halfwidth = 0.0;  // Wilson 95%
};

/// A hit is a record whose final running sup exceeds N^-alpha. Throws
/// ConfigError on an empty list or mixed N.
ExceedanceEstimate estimate_exceedance(std::span<const DeviationRecord> records, double alpha);

struct SweepOptions {
  std::vector<std::size_t> n_list;
  std::size_t trials = 50;
  ExponentSet exponents;
  InitialLaw law;
  ModelParams params;         // epsilon, delta, r_cut overwritten per N
  IntegratorConfig integrator;  // dt <= 0 selects guarded_dt per N
  double m_factor = 16.0;
  std::uint64_t master_seed = 0;
};

struct SweepRow {
  std::size_t n_particles;
  double epsilon;
  double delta;
  double r_cut;
  double dt;
  ExceedanceEstimate estimate;
  double mean_final_sup;
  std::vector<DeviationRecord> records;
};

/// Model parameters with epsilon, delta, r_cut taken from the scaling at N.
ModelParams scaled_params(const ModelParams& base, double n, const ExponentSet& e);

/// Rejects invalid exponents before any simulation. Trials run in parallel;
/// trial k at size N uses derive_seed(master_seed, N, k).
std::vector<SweepRow> sweep_exceedance(const SweepOptions& options);

/// `N,epsilon,delta,R,alpha,trials,hits,p_hat,ci_halfwidth,mean_final_sup`
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
/// `t,sup_deviation,s_process`
void write_deviation_csv(std::ostream& out, const DeviationRecord& record);

}  // namespace meanfield
