#include "meanfield/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>

#include "meanfield/empirical_measure.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/snapshot_io.hpp"
#include "meanfield/stats.hpp"

namespace meanfield {

std::string_view to_string(ConcentrationSet which) {
  switch (which) {
    case ConcentrationSet::Kappa: return "kappa";
    case ConcentrationSet::Gamma: return "gamma";
    case ConcentrationSet::Eta: return "eta";
    case ConcentrationSet::Mu: return "mu";
  }
  return "unknown";
}

ConcentrationSet parse_concentration_set(std::string_view name) {
  if (name == "kappa") return ConcentrationSet::Kappa;
  if (name == "gamma") return ConcentrationSet::Gamma;
  if (name == "eta") return ConcentrationSet::Eta;
  if (name == "mu") return ConcentrationSet::Mu;
  throw ConfigError("unknown concentration set '" + std::string(name) +
                    "' (expected kappa, gamma, eta or mu)");
}

double exponent_of(ConcentrationSet which, const ExponentSet& e) {
  switch (which) {
    case ConcentrationSet::Kappa: return e.kappa;
    case ConcentrationSet::Gamma: return e.gamma_exp;
    case ConcentrationSet::Eta: return e.eta;
    case ConcentrationSet::Mu: return e.mu;
  }
  return 0.0;
}

namespace {

std::string_view constraint_name(ConcentrationSet which) {
  return which == ConcentrationSet::Gamma ? "gamma_exp" : to_string(which);
}

double deviation_at(ConcentrationSet which, std::span<const double> x, std::span<const double> v,
                    const EmpiricalMeasure& empirical, const EmpiricalMeasure& oracle,
                    const ModelParams& p) {
  switch (which) {
    case ConcentrationSet::Kappa:
      return p.lambda * (empirical.force(x) - oracle.force(x)).max_abs();
    case ConcentrationSet::Gamma:
      return p.lambda * std::abs(empirical.envelope_q(x) - oracle.envelope_q(x));
    case ConcentrationSet::Eta: {
      const bool self = p.alignment == AlignmentIndex::Self;
      const Vec a = self ? empirical.local_velocity_self(x, v) : empirical.local_velocity(x);
      const Vec b = self ? oracle.local_velocity_self(x, v) : oracle.local_velocity(x);
      return p.beta * (a - b).max_abs();
    }
    case ConcentrationSet::Mu:
      return std::abs(empirical.grad_mollifier(x) - oracle.grad_mollifier(x));
  }
  return 0.0;
}

void check_shapes(const PhaseEnsemble& ensemble, const PhaseEnsemble& oracle,
                  const ModelParams& p) {
  if (ensemble.dim() != oracle.dim() || ensemble.dim() != p.dim) {
    throw ConfigError("concentration: dimension mismatch between ensemble, oracle and params");
  }
}

}  // namespace

double point_deviation(ConcentrationSet which, std::size_t i, const PhaseEnsemble& ensemble,
                       const PhaseEnsemble& oracle, const ModelParams& p) {
  check_shapes(ensemble, oracle, p);
  if (i >= ensemble.size()) throw ConfigError("point_deviation: index out of range");
  const EmpiricalMeasure empirical(ensemble, p), mean_field(oracle, p);
  return deviation_at(which, ensemble.position(i), ensemble.velocity(i), empirical, mean_field, p);
}

double sup_deviation(ConcentrationSet which, const PhaseEnsemble& ensemble,
                     const PhaseEnsemble& oracle, const ModelParams& p) {
  check_shapes(ensemble, oracle, p);
  const EmpiricalMeasure empirical(ensemble, p), mean_field(oracle, p);
  const auto n = static_cast<std::ptrdiff_t>(ensemble.size());
  double sup = 0.0;
#pragma omp parallel for schedule(static) reduction(max : sup)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    sup = std::max(sup, deviation_at(which, ensemble.position(idx), ensemble.velocity(idx),
                                     empirical, mean_field, p));
  }
  return sup;
}

bool set_membership(ConcentrationSet which, const PhaseEnsemble& ensemble,
                    const PhaseEnsemble& oracle, const ModelParams& p, double exponent) {
  const double threshold = std::pow(static_cast<double>(ensemble.size()), -exponent);
  return sup_deviation(which, ensemble, oracle, p) > threshold;
}

double paper_bound(ConcentrationSet which, const ModelParams& p, double n, double exponent,
                   double c_const) {
  const int d = p.dim;
  const double rate = std::pow(n, -(1.0 - 4.0 * exponent));
  const double eps = p.epsilon;
  switch (which) {
    case ConcentrationSet::Kappa:
      return std::pow(p.lambda, 4) * c_const * std::pow(eps, -4.0 * (d - 1)) * rate;
    case ConcentrationSet::Gamma:
      return std::pow(p.lambda, 4) * c_const * std::pow(eps, -2.0 * d) * rate;
    case ConcentrationSet::Eta:
      return c_const * std::pow(p.beta, 4) * std::pow(eps, -4.0 * d) * rate *
             (std::pow(p.r_cut, 4) + std::pow(p.delta, -4));
    case ConcentrationSet::Mu:
      return c_const * std::pow(eps, -4.0 * (d + 1)) * rate;
  }
  return 0.0;
}

ConcentrationEstimate estimate_set_probability(const ConcentrationOptions& o) {
  if (o.trials == 0) throw ConfigError("concentration: trials must be >= 1");
  if (o.n == 0) throw ConfigError("concentration: N must be >= 1");
  if (!(o.m_oracle_factor >= 1.0)) throw ConfigError("concentration: m_oracle_factor must be >= 1");
  if (o.t_eval < 0.0) throw ConfigError("concentration: t_eval must be >= 0");

  const ScalingReport report = validate_exponents(o.params.dim, o.exponents);
  for (const auto& c : report.constraints) {
    if (!c.ok && (c.name == "theta" || c.name == "alpha" || c.name == constraint_name(o.which))) {
      throw ConfigError("concentration: exponent " + c.name + " outside its interval");
    }
  }

  ModelParams p = o.params;
  if (o.use_scaling) {
    const ScaledParams s = derive_scaling(static_cast<double>(o.n), o.exponents.theta,
                                          o.exponents.vartheta);
    p.epsilon = s.epsilon;
    p.delta = s.delta;
    p.r_cut = s.r_cut;
  }
  p.validate();

  IntegratorConfig cfg = o.integrator;
  std::size_t steps = 0;
  if (o.t_eval > 0.0) {
    cfg.t_end = o.t_eval;
    if (!(cfg.dt > 0.0)) cfg.dt = guarded_dt(o.t_eval, p);
    cfg.validate(p);
    steps = cfg.steps();
  }

  const double exponent = exponent_of(o.which, o.exponents);
  const auto m_oracle =
      static_cast<std::size_t>(std::llround(o.m_oracle_factor * static_cast<double>(o.n)));
  const double threshold = std::pow(static_cast<double>(o.n), -exponent);

  std::vector<char> hit(o.trials, 0);
  std::exception_ptr failure;
  const auto trials = static_cast<std::ptrdiff_t>(o.trials);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < trials; ++k) {
    try {
      const std::uint64_t trial_seed =
          derive_seed(o.seed, static_cast<std::uint64_t>(o.which) * 0x10000u + o.n,
                      static_cast<std::uint64_t>(k));
      PhaseEnsemble ensemble = sample_initial(o.law, o.n, derive_seed(trial_seed, 0, 0));
      PhaseEnsemble oracle = sample_initial(o.law, m_oracle, derive_seed(trial_seed, 1, 0));
      for (std::size_t s = 0; s < steps; ++s) {
        LockstepState next = step_lockstep(ensemble, oracle, p, cfg.dt, cfg.scheme);
        ensemble = std::move(next.test);
        oracle = std::move(next.reference);
      }
      hit[static_cast<std::size_t>(k)] = sup_deviation(o.which, ensemble, oracle, p) > threshold;
    } catch (...) {
#pragma omp critical(meanfield_concentration_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  ConcentrationEstimate out;
  out.which = o.which;
  out.exponent = exponent;
  out.n_particles = o.n;
  out.epsilon = p.epsilon;
  out.delta = p.delta;
  out.r_cut = p.r_cut;
  out.trials = o.trials;
  out.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  out.p_hat = static_cast<double>(out.hits) / static_cast<double>(out.trials);
  out.ci_halfwidth = wilson_interval(out.hits, out.trials).halfwidth;
  out.paper_bound = paper_bound(o.which, p, static_cast<double>(o.n), exponent, o.c_const);
  return out;
}

void write_concentration_csv(std::ostream& out, std::span<const ConcentrationEstimate> rows) {
  out << "which,N,exponent,epsilon,delta,R,trials,hits,p_hat,ci_halfwidth,paper_bound\n";
  for (const auto& r : rows) {
    out << to_string(r.which) << ',' << r.n_particles << ',' << format_double(r.exponent) << ','
        << format_double(r.epsilon) << ',' << format_double(r.delta) << ','
        << format_double(r.r_cut) << ',' << r.trials << ',' << r.hits << ','
        << format_double(r.p_hat) << ',' << format_double(r.ci_halfwidth) << ','
        << format_double(r.paper_bound) << '\n';
  }
}

double fourth_moment_oracle(double m2, double m4, std::size_t n) {
  if (!(m2 >= 0.0) || !(m4 >= 0.0)) throw ConfigError("fourth_moment_oracle: negative moment");
  if (m4 < m2 * m2) throw ConfigError("fourth_moment_oracle: requires m4 >= m2^2");
  const double nn = static_cast<double>(n);
  return nn * m4 + 3.0 * nn * (nn - 1.0) * m2 * m2;
}

MomentEstimate empirical_fourth_moment(const Sampler& sampler, std::size_t n, std::size_t draws,
                                       std::uint64_t seed) {
  if (draws < 100) throw ConfigError("empirical_fourth_moment: draws must be >= 100");
  constexpr std::size_t kBlock = 1024;
  const std::size_t blocks = (draws + kBlock - 1) / kBlock;
  std::vector<double> values(draws);
  const auto nblocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    std::mt19937_64 rng(derive_seed(seed, 0, static_cast<std::uint64_t>(b)));
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(draws, begin + kBlock);
    for (std::size_t r = begin; r < end; ++r) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += sampler(rng);
      const double s2 = sum * sum;
      values[r] = s2 * s2;
    }
  }
  const MeanWithError est = jackknife_mean(values);
  return {est.mean, est.std_error};
}

}  // namespace meanfield
