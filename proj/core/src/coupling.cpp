#include "meanfield/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>

#include "meanfield/errors.hpp"
#include "meanfield/snapshot_io.hpp"
#include "meanfield/stats.hpp"

namespace meanfield {

double max_norm_distance(const PhaseEnsemble& a, const PhaseEnsemble& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) {
    throw ConfigError("max_norm_distance: ensembles differ in shape");
  }
  double out = 0.0;
  const auto ax = a.positions_raw(), bx = b.positions_raw();
  const auto av = a.velocities_raw(), bv = b.velocities_raw();
  for (std::size_t idx = 0; idx < ax.size(); ++idx) {
    out = std::max(out, std::abs(ax[idx] - bx[idx]));
    out = std::max(out, std::abs(av[idx] - bv[idx]));
  }
  return out;
}

DeviationRecord run_coupled_trial(std::size_t n, std::size_t m, const InitialLaw& law,
                                  const ModelParams& p, const IntegratorConfig& cfg,
                                  double alpha, std::uint64_t seed) {
  if (n == 0) throw ConfigError("run_coupled_trial: n must be >= 1");
  if (m < n) throw ConfigError("run_coupled_trial: reference size m must be >= n");
  p.validate();
  cfg.validate(p);

  PhaseEnsemble reference = sample_initial(law, m, seed);
  PhaseEnsemble particles = reference.head(n);
  PhaseEnsemble mean_field = particles;

  DeviationRecord record;
  record.trial_seed = seed;
  record.n_particles = n;
  record.alpha = alpha;
  const double scale = std::pow(static_cast<double>(n), alpha);
  double running = max_norm_distance(particles, mean_field);
  auto emit = [&](double t) {
    record.times.push_back(t);
    record.sup_deviation.push_back(running);
    record.s_process.push_back(std::min(1.0, scale * running));
  };
  emit(0.0);

  const std::size_t steps = cfg.steps();
  try {
    for (std::size_t k = 1; k <= steps; ++k) {
      particles = step(particles, SelfInteracting{}, p, cfg.dt, cfg.scheme);
      LockstepState next = step_lockstep(mean_field, reference, p, cfg.dt, cfg.scheme);
      mean_field = std::move(next.test);
      reference = std::move(next.reference);
      running = std::max(running, max_norm_distance(particles, mean_field));
      if (k % cfg.snapshot_stride == 0 || k == steps) emit(static_cast<double>(k) * cfg.dt);
    }
  } catch (const IntegrationError& e) {
    std::ostringstream msg;
    msg << e.what() << " [trial seed " << seed << "]";
    throw IntegrationError(msg.str(), e.particle());
  }
  return record;
}

ExceedanceEstimate estimate_exceedance(std::span<const DeviationRecord> records, double alpha) {
  if (records.empty()) throw ConfigError("estimate_exceedance: no records");
  const std::size_t n = records.front().n_particles;
  ExceedanceEstimate out;
  out.n_particles = n;
  out.alpha = alpha;
  out.threshold = std::pow(static_cast<double>(n), -alpha);
  out.trials = records.size();
  for (const auto& r : records) {
    if (r.n_particles != n) throw ConfigError("estimate_exceedance: records mix N");
    if (r.times.size() != records.front().times.size()) {
      throw ConfigError("estimate_exceedance: records use different time grids");
    }
    if (r.final_sup() > out.threshold) ++out.hits;
  }
  out.p_hat = static_cast<double>(out.hits) / static_cast<double>(out.trials);
  out.ci_halfwidth = wilson_interval(out.hits, out.trials).halfwidth;
  return out;
}

ModelParams scaled_params(const ModelParams& base, double n, const ExponentSet& e) {
  const ScaledParams s = derive_scaling(n, e.theta, e.vartheta);
  ModelParams p = base;
  p.epsilon = s.epsilon;
  p.delta = s.delta;
  p.r_cut = s.r_cut;
  return p;
}

std::vector<SweepRow> sweep_exceedance(const SweepOptions& options) {
  if (options.n_list.empty()) throw ConfigError("sweep: n_list is empty");
  if (options.trials == 0) throw ConfigError("sweep: trials must be >= 1");
  if (!(options.m_factor >= 1.0)) throw ConfigError("sweep: m_factor must be >= 1");
  const ScalingReport report = validate_exponents(options.params.dim, options.exponents);
  if (!report.valid) {
    std::string names;
    for (const auto& v : report.violations) names += (names.empty() ? "" : ", ") + v;
    throw ConfigError("sweep: invalid exponent set (" + names + ")");
  }
  for (std::size_t n : options.n_list) {
    if (n < 2) throw ConfigError("sweep: every N must be >= 2");
  }

  std::vector<SweepRow> rows;
  for (std::size_t n : options.n_list) {
    const ModelParams p = scaled_params(options.params, static_cast<double>(n), options.exponents);
    IntegratorConfig cfg = options.integrator;
    if (!(cfg.dt > 0.0)) cfg.dt = guarded_dt(cfg.t_end, p);
    cfg.validate(p);
    const auto m = static_cast<std::size_t>(std::llround(options.m_factor * static_cast<double>(n)));

    std::vector<DeviationRecord> records(options.trials);
    std::exception_ptr failure;
    const auto trials = static_cast<std::ptrdiff_t>(options.trials);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < trials; ++k) {
      try {
        const std::uint64_t seed = derive_seed(options.master_seed, n, static_cast<std::uint64_t>(k));
        records[static_cast<std::size_t>(k)] = run_coupled_trial(n, m, options.law, p, cfg,
                                                                 options.exponents.alpha, seed);
      } catch (...) {
#pragma omp critical(meanfield_sweep_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    double total = 0.0;
    for (const auto& r : records) total += r.final_sup();
    rows.push_back({n, p.epsilon, p.delta, p.r_cut, cfg.dt,
                    estimate_exceedance(records, options.exponents.alpha),
                    total / static_cast<double>(records.size()), std::move(records)});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "N,epsilon,delta,R,alpha,trials,hits,p_hat,ci_halfwidth,mean_final_sup\n";
  for (const auto& r : rows) {
    out << r.n_particles << ',' << format_double(r.epsilon) << ',' << format_double(r.delta)
        << ',' << format_double(r.r_cut) << ',' << format_double(r.estimate.alpha) << ','
        << r.estimate.trials << ',' << r.estimate.hits << ',' << format_double(r.estimate.p_hat)
        << ',' << format_double(r.estimate.ci_halfwidth) << ','
        << format_double(r.mean_final_sup) << '\n';
  }
}

void write_deviation_csv(std::ostream& out, const DeviationRecord& record) {
  out << "t,sup_deviation,s_process\n";
  for (std::size_t k = 0; k < record.times.size(); ++k) {
    out << format_double(record.times[k]) << ',' << format_double(record.sup_deviation[k]) << ','
        << format_double(record.s_process[k]) << '\n';
  }
}

}  // namespace meanfield
