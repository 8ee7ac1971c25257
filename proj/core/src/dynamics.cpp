#include "meanfield/dynamics.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "meanfield/errors.hpp"
#include "meanfield/snapshot_io.hpp"

namespace meanfield {

double dt_max(const ModelParams& p) {
  const double force_scale =
      p.pair_force ? p.lambda * newtonian_force_bound(p) : 0.0;
  const double drift_scale = p.gamma_damp + p.beta + p.lambda;
  const double inf = std::numeric_limits<double>::infinity();
  const double a = force_scale > 0.0 ? 1.0 / force_scale : inf;
  const double b = drift_scale > 0.0 ? 1.0 / drift_scale : inf;
  return 0.1 * std::min(a, b);
}

double guarded_dt(double t_end, const ModelParams& p) {
  if (!(t_end > 0.0)) throw ConfigError("guarded_dt: t_end must be > 0");
  const double limit = dt_max(p);
  const double steps = std::ceil(t_end / limit);
  return t_end / std::max(1.0, steps);
}

std::size_t IntegratorConfig::steps() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

void IntegratorConfig::validate(const ModelParams& p) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be finite and > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be >= 0");
  if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
  if (std::abs(static_cast<double>(steps()) * dt - t_end) > 1e-12) {
    throw ConfigError("t_end must be an integer multiple of dt");
  }
  const double limit = dt_max(p);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the stability guard dt_max = " << limit;
    throw ConfigError(msg.str());
  }
}

void accelerations(const PhaseEnsemble& targets, const EmpiricalMeasure& measure,
                   const ModelParams& p, std::span<double> out) {
  const std::size_t n = targets.size();
  const int d = targets.dim();
  assert(out.size() == n * static_cast<std::size_t>(d));
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const Vec x = targets.position(i);
    const Vec v = targets.velocity(i);

    Vec a = -drift_G(x, v, p);
    EmpiricalMeasure::Alignment align;
    if (p.pair_force) {
      const EmpiricalMeasure::Interaction both = measure.interaction(x);
      const Vec psi = -p.lambda * both.force;
      assert(psi.norm() <= p.lambda * newtonian_force_bound(p) * (1.0 + 1e-12));
      a += psi;
      align = both.alignment;
    } else {
      align = measure.alignment(x);
    }
    const double shrink = 1.0 / (align.density + p.delta);
    const Vec u = p.alignment == AlignmentIndex::Neighbor
                      ? align.momentum * shrink
                      : velocity_cutoff(v, p) * (align.density * shrink);
    assert(u.norm() <= 2.0 * p.r_cut);
    a += p.beta * u;

    for (int k = 0; k < d; ++k) out[static_cast<std::size_t>(k) * n + i] = a[k];
  }
}

Vec acceleration(std::size_t i, const PhaseEnsemble& state, const ForceMode& mode,
                 const ModelParams& p) {
  if (i >= state.size()) throw ConfigError("acceleration: particle index out of range");
  const PhaseEnsemble& source = std::holds_alternative<Reference>(mode)
                                    ? std::get<Reference>(mode).source.get()
                                    : state;
  if (source.dim() != state.dim()) throw ConfigError("acceleration: dimension mismatch");
  const EmpiricalMeasure measure(source, p);
  const PhaseEnsemble single = state.permuted(std::vector<std::size_t>{i});
  std::vector<double> out(static_cast<std::size_t>(state.dim()));
  accelerations(single, measure, p, out);
  return Vec::from(out);
}

namespace {

// d/dt (x, v) = (v, a), coordinate-major like PhaseEnsemble storage.
struct Slope {
  std::vector<double> dx;
  std::vector<double> dv;
};

Slope slope(const PhaseEnsemble& targets, const PhaseEnsemble& source, const ModelParams& p) {
  Slope s;
  s.dx.assign(targets.velocities_raw().begin(), targets.velocities_raw().end());
  s.dv.resize(s.dx.size());
  accelerations(targets, EmpiricalMeasure(source, p), p, s.dv);
  return s;
}

PhaseEnsemble advance(const PhaseEnsemble& base, const Slope& s, double h) {
  PhaseEnsemble out = base;
  auto px = out.positions_raw();
  auto pv = out.velocities_raw();
  for (std::size_t idx = 0; idx < px.size(); ++idx) {
    px[idx] += h * s.dx[idx];
    pv[idx] += h * s.dv[idx];
  }
  return out;
}

PhaseEnsemble combine_rk4(const PhaseEnsemble& base, const Slope& k1, const Slope& k2,
                          const Slope& k3, const Slope& k4, double dt) {
  PhaseEnsemble out = base;
  auto px = out.positions_raw();
  auto pv = out.velocities_raw();
  const double w = dt / 6.0;
  for (std::size_t idx = 0; idx < px.size(); ++idx) {
    px[idx] += w * (k1.dx[idx] + 2.0 * k2.dx[idx] + 2.0 * k3.dx[idx] + k4.dx[idx]);
    pv[idx] += w * (k1.dv[idx] + 2.0 * k2.dv[idx] + 2.0 * k3.dv[idx] + k4.dv[idx]);
  }
  return out;
}

void check_finite(const PhaseEnsemble& e, const char* which) {
  if (const auto bad = e.first_nonfinite()) {
    std::ostringstream msg;
    msg << "non-finite " << which << " state at particle " << *bad << " (t = " << e.time()
        << ")";
    throw IntegrationError(msg.str(), *bad);
  }
}

// One step of the self-interacting reference and, optionally, of test
// particles driven by the reference's stage states.
LockstepState integrate(const PhaseEnsemble* test, const PhaseEnsemble& reference,
                        const ModelParams& p, double dt, Scheme scheme) {
  const double t_next = reference.time() + dt;
  LockstepState out;
  if (scheme == Scheme::Euler) {
    const Slope kr = slope(reference, reference, p);
    if (test != nullptr) out.test = advance(*test, slope(*test, reference, p), dt);
    out.reference = advance(reference, kr, dt);
  } else {
    const Slope r1 = slope(reference, reference, p);
    const PhaseEnsemble r2s = advance(reference, r1, 0.5 * dt);
    const Slope r2 = slope(r2s, r2s, p);
    const PhaseEnsemble r3s = advance(reference, r2, 0.5 * dt);
    const Slope r3 = slope(r3s, r3s, p);
    const PhaseEnsemble r4s = advance(reference, r3, dt);
    const Slope r4 = slope(r4s, r4s, p);
    if (test != nullptr) {
      const Slope t1 = slope(*test, reference, p);
      const Slope t2 = slope(advance(*test, t1, 0.5 * dt), r2s, p);
      const Slope t3 = slope(advance(*test, t2, 0.5 * dt), r3s, p);
      const Slope t4 = slope(advance(*test, t3, dt), r4s, p);
      out.test = combine_rk4(*test, t1, t2, t3, t4, dt);
    }
    out.reference = combine_rk4(reference, r1, r2, r3, r4, dt);
  }
  out.reference.set_time(t_next);
  check_finite(out.reference, "reference");
  if (test != nullptr) {
    out.test.set_time(test->time() + dt);
    check_finite(out.test, "test");
  }
  return out;
}

}  // namespace

PhaseEnsemble step(const PhaseEnsemble& state, const ForceMode& mode, const ModelParams& p,
                   double dt, Scheme scheme) {
  if (const auto* ref = std::get_if<Reference>(&mode)) {
    return step_lockstep(state, ref->source.get(), p, dt, scheme).test;
  }
  return integrate(nullptr, state, p, dt, scheme).reference;
}

LockstepState step_lockstep(const PhaseEnsemble& test, const PhaseEnsemble& reference,
                            const ModelParams& p, double dt, Scheme scheme) {
  if (test.dim() != reference.dim()) throw ConfigError("step_lockstep: dimension mismatch");
  return integrate(&test, reference, p, dt, scheme);
}

std::vector<PhaseEnsemble> evolve(const PhaseEnsemble& state, const ForceMode& mode,
                                  const ModelParams& p, const IntegratorConfig& cfg) {
  cfg.validate(p);
  const std::size_t steps = cfg.steps();
  const double t0 = state.time();
  std::vector<PhaseEnsemble> snapshots{state};

  PhaseEnsemble current = state;
  std::optional<PhaseEnsemble> source;
  if (const auto* ref = std::get_if<Reference>(&mode)) source = ref->source.get();

  for (std::size_t k = 1; k <= steps; ++k) {
    if (source) {
      LockstepState next = step_lockstep(current, *source, p, cfg.dt, cfg.scheme);
      current = std::move(next.test);
      source = std::move(next.reference);
    } else {
      current = step(current, SelfInteracting{}, p, cfg.dt, cfg.scheme);
    }
    current.set_time(t0 + static_cast<double>(k) * cfg.dt);
    if (k % cfg.snapshot_stride == 0 || k == steps) snapshots.push_back(current);
  }
  return snapshots;
}

void write_trajectory(const std::filesystem::path& dir,
                      const std::vector<PhaseEnsemble>& snapshots) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "index.csv", std::ios::binary);
  if (!index) throw ConfigError("cannot write " + (dir / "index.csv").string());
  index << "t,path\n";
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    std::ostringstream name;
    name << "snapshot_" << s << ".csv";
    write_ensemble_csv(dir / name.str(), snapshots[s]);
    index << format_double(snapshots[s].time()) << ',' << name.str() << '\n';
  }
}

}  // namespace meanfield
