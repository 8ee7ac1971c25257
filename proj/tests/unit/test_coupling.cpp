#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "meanfield/coupling.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/stats.hpp"

using namespace meanfield;

namespace {

ModelParams base() {
  ModelParams p;
  p.dim = 2;
  p.lambda = 0.5;
  p.gamma_damp = 0.5;
  p.beta = 0.5;
  p.epsilon = 0.5;
  p.delta = 0.5;
  p.r_cut = 3.0;
  return p;
}

IntegratorConfig horizon(const ModelParams& p, double t_end = 0.2) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.dt = guarded_dt(t_end, p);
  return cfg;
}

DeviationRecord synthetic(std::size_t n, double final_sup) {
  DeviationRecord r;
  r.n_particles = n;
  r.times = {0.0, 1.0};
  r.sup_deviation = {0.0, final_sup};
  r.s_process = {0.0, std::min(1.0, final_sup)};
  return r;
}

}  // namespace

TEST(MaxNormDistance, TakesLargestCoordinate) {
  PhaseEnsemble a(2, 2), b(2, 2);
  b.set_position(1, Vec{0.0, -0.3});
  b.set_velocity(0, Vec{0.2, 0.0});
  EXPECT_DOUBLE_EQ(max_norm_distance(a, b), 0.3);
  EXPECT_THROW(max_norm_distance(a, PhaseEnsemble(2, 3)), ConfigError);
}

TEST(CoupledTrial, IdenticalSystemsWhenMEqualsN) {
  const ModelParams p = base();
  const DeviationRecord r =
      run_coupled_trial(12, 12, InitialLaw::centered(2, 1.0, 1.0), p, horizon(p), 0.06, 5);
  for (double s : r.sup_deviation) EXPECT_EQ(s, 0.0);
  for (double s : r.s_process) EXPECT_EQ(s, 0.0);
}

TEST(CoupledTrial, NoInteractionMeansNoDeviation) {
  ModelParams p = base();
  p.lambda = 0.0;
  p.beta = 0.0;
  const DeviationRecord r =
      run_coupled_trial(10, 80, InitialLaw::centered(2, 1.0, 1.0), p, horizon(p), 0.06, 6);
  for (double s : r.sup_deviation) EXPECT_EQ(s, 0.0);
}

TEST(CoupledTrial, ProcessShape) {
  ModelParams p = base();
  p.lambda = 2.0;
  IntegratorConfig cfg = horizon(p, 0.5);
  cfg.snapshot_stride = 2;
  const DeviationRecord r =
      run_coupled_trial(16, 64, InitialLaw::centered(2, 0.5, 1.0), p, cfg, 1.5, 7);
  EXPECT_EQ(r.sup_deviation.front(), 0.0);
  EXPECT_NEAR(r.times.back(), 0.5, 1e-12);
  EXPECT_GT(r.final_sup(), 0.0);
  for (std::size_t k = 1; k < r.times.size(); ++k) {
    EXPECT_GE(r.sup_deviation[k], r.sup_deviation[k - 1]);
    EXPECT_GE(r.s_process[k], r.s_process[k - 1]);
    EXPECT_LE(r.s_process[k], 1.0);
    EXPECT_DOUBLE_EQ(r.s_process[k], std::min(1.0, std::pow(16.0, 1.5) * r.sup_deviation[k]));
  }
}

TEST(CoupledTrial, RejectsSmallReference) {
  const ModelParams p = base();
  EXPECT_THROW(run_coupled_trial(10, 5, InitialLaw::centered(2, 1, 1), p, horizon(p), 0.06, 1),
               ConfigError);
}

TEST(CoupledTrial, Deterministic) {
  const ModelParams p = base();
  const auto law = InitialLaw::centered(2, 1.0, 1.0);
  const auto a = run_coupled_trial(8, 32, law, p, horizon(p), 0.06, 11);
  const auto b = run_coupled_trial(8, 32, law, p, horizon(p), 0.06, 11);
  EXPECT_EQ(a.sup_deviation, b.sup_deviation);
}

TEST(CoupledTrial, DeviationIsLabelInvariant) {
  // Relabeling both flows consistently leaves the max-norm distance unchanged.
  const PhaseEnsemble a = sample_initial(InitialLaw::centered(2, 1, 1), 20, 1);
  const PhaseEnsemble b = sample_initial(InitialLaw::centered(2, 1, 1), 20, 2);
  std::vector<std::size_t> order(20);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
  EXPECT_EQ(max_norm_distance(a, b), max_norm_distance(a.permuted(order), b.permuted(order)));
}

TEST(Exceedance, AllZeroAndAllHit) {
  std::vector<DeviationRecord> zeros(10, synthetic(64, 0.0));
  EXPECT_EQ(estimate_exceedance(zeros, 0.06).p_hat, 0.0);
  std::vector<DeviationRecord> hits(10, synthetic(64, 5.0));
  const auto e = estimate_exceedance(hits, 0.06);
  EXPECT_EQ(e.p_hat, 1.0);
  EXPECT_EQ(e.hits, 10u);
  EXPECT_DOUBLE_EQ(e.threshold, std::pow(64.0, -0.06));
}

TEST(Exceedance, BernoulliWithinWilson) {
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution hit(0.3);
  std::vector<DeviationRecord> records;
  for (int k = 0; k < 1000; ++k) records.push_back(synthetic(100, hit(rng) ? 10.0 : 0.0));
  const auto e = estimate_exceedance(records, 0.1);
  EXPECT_DOUBLE_EQ(e.ci_halfwidth, wilson_interval(e.hits, e.trials).halfwidth);
  const Interval wide = wilson_interval(e.hits, e.trials, 4.0);
  EXPECT_LE(std::abs(0.3 - wide.center), wide.halfwidth);
}

TEST(Exceedance, LargerAlphaNeverFewerHits) {
  std::vector<DeviationRecord> records;
  for (int k = 1; k <= 50; ++k) records.push_back(synthetic(256, 0.02 * k));
  std::size_t prev = 0;
  for (double alpha : {0.0, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    const auto e = estimate_exceedance(records, alpha);
    EXPECT_GE(e.hits, prev);
    prev = e.hits;
  }
}

TEST(Exceedance, Errors) {
  EXPECT_THROW(estimate_exceedance(std::vector<DeviationRecord>{}, 0.1), ConfigError);
  std::vector<DeviationRecord> mixed = {synthetic(10, 0), synthetic(20, 0)};
  EXPECT_THROW(estimate_exceedance(mixed, 0.1), ConfigError);
}

TEST(Sweep, SingleRowEchoesScaling) {
  SweepOptions o;
  o.n_list = {64};
  o.trials = 3;
  o.law = InitialLaw::centered(2, 1.0, 1.0);
  o.params = base();
  o.integrator.t_end = 0.1;
  o.integrator.dt = 0.0;
  o.m_factor = 2.0;
  const auto rows = sweep_exceedance(o);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].epsilon, std::pow(64.0, -0.04));
  EXPECT_DOUBLE_EQ(rows[0].delta, 1.0 / std::sqrt(0.02 * std::log(64.0)));
  EXPECT_EQ(rows[0].records.size(), 3u);
  for (const auto& r : rows[0].records) EXPECT_EQ(r.sup_deviation.front(), 0.0);

  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "N,epsilon,delta,R,alpha,trials,hits,p_hat,ci_halfwidth,mean_final_sup");
}

TEST(Sweep, ScaledEpsilonArithmetic) {
  ExponentSet e;
  e.theta = 0.05;
  const ModelParams p = scaled_params(base(), 256.0, e);
  EXPECT_NEAR(p.epsilon, 0.757858, 1e-6);
  EXPECT_DOUBLE_EQ(p.r_cut * p.delta, 1.0);
}

TEST(Sweep, RejectsInvalidExponentsBeforeRunning) {
  SweepOptions o;
  o.n_list = {64};
  o.exponents.theta = 0.05;
  o.params = base();
  EXPECT_THROW(sweep_exceedance(o), ConfigError);
  o.exponents = ExponentSet{};
  o.n_list = {1};
  EXPECT_THROW(sweep_exceedance(o), ConfigError);
  o.n_list = {};
  EXPECT_THROW(sweep_exceedance(o), ConfigError);
}

TEST(DeviationCsv, Header) {
  std::ostringstream out;
  write_deviation_csv(out, synthetic(4, 0.25));
  EXPECT_EQ(out.str(), "t,sup_deviation,s_process\n0,0,0\n1,0.25,0.25\n");
}
