#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "meanfield/empirical_measure.hpp"
#include "meanfield/ensemble.hpp"
#include "meanfield/errors.hpp"
#include "meanfield/kernels.hpp"
#include "meanfield/snapshot_io.hpp"

using namespace meanfield;

namespace {

ModelParams params(int d = 2) {
  ModelParams p;
  p.dim = d;
  p.epsilon = 0.4;
  p.delta = 0.3;
  p.r_cut = 1.5;
  return p;
}

PhaseEnsemble single(std::span<const double> x, std::span<const double> v) {
  PhaseEnsemble e(static_cast<int>(x.size()), 1);
  e.set_position(0, x);
  e.set_velocity(0, v);
  return e;
}

// Direct sums written independently of the library loops.
Vec naive_force(const Vec& x, const PhaseEnsemble& s, const ModelParams& p) {
  Vec acc(p.dim);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const Vec r = x - s.position(j);
    const double n = std::max(r.norm(), p.epsilon);
    acc += r * (p.c_d / std::pow(n, p.dim));
  }
  return acc * (1.0 / s.size());
}

Vec naive_local_velocity(const Vec& x, const PhaseEnsemble& s, const ModelParams& p) {
  Vec num(p.dim);
  double den = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double w = mollifier(x - s.position(j), p);
    num += velocity_cutoff(s.velocity(j), p) * w;
    den += w;
  }
  return num * (1.0 / (den / s.size() + p.delta) / s.size());
}

}  // namespace

TEST(PhaseEnsemble, RejectsEmpty) {
  EXPECT_THROW(PhaseEnsemble(2, 0), ConfigError);
  EXPECT_THROW(sample_initial(InitialLaw::centered(2, 1.0, 1.0), 0, 1), ConfigError);
}

TEST(PhaseEnsemble, HeadPermuteConcat) {
  const PhaseEnsemble e = sample_initial(InitialLaw::centered(3, 1.0, 1.0), 10, 4);
  const PhaseEnsemble h = e.head(4);
  ASSERT_EQ(h.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(h.position(i), e.position(i));
  std::vector<std::size_t> order(10);
  std::iota(order.rbegin(), order.rend(), 0);
  const PhaseEnsemble r = e.permuted(order);
  EXPECT_EQ(r.velocity(0), e.velocity(9));
  const PhaseEnsemble c = PhaseEnsemble::concat(h, e);
  EXPECT_EQ(c.size(), 14u);
  EXPECT_EQ(c.position(4), e.position(0));
}

TEST(PhaseEnsemble, FirstNonFinite) {
  PhaseEnsemble e(2, 3);
  EXPECT_FALSE(e.first_nonfinite());
  e.set_velocity(2, Vec{0.0, INFINITY});
  EXPECT_EQ(e.first_nonfinite(), 2u);
}

TEST(SampleInitial, DeterministicGivenSeed) {
  const InitialLaw law = InitialLaw::centered(2, 1.0, 1.0);
  EXPECT_EQ(sample_initial(law, 100, 9), sample_initial(law, 100, 9));
  EXPECT_NE(sample_initial(law, 100, 9), sample_initial(law, 100, 10));
  EXPECT_EQ(sample_initial(law, 100, 9).time(), 0.0);
}

TEST(SampleInitial, MeanWithinFourStandardErrors) {
  InitialLaw law = InitialLaw::centered(2, 1.0, 1.0);
  law.velocity_mean = Vec{0.5, -2.0};
  const std::size_t n = 100000;
  const PhaseEnsemble e = sample_initial(law, n, 77);
  for (int k = 0; k < 2; ++k) {
    const auto v = e.velocity_coord(k);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    EXPECT_NEAR(mean, law.velocity_mean[k], 4.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST(SampleInitial, SingleParticleFinite) {
  const PhaseEnsemble e = sample_initial(InitialLaw::centered(2, 1.0, 1.0), 1, 3);
  EXPECT_EQ(e.size(), 1u);
  EXPECT_FALSE(e.first_nonfinite());
}

TEST(InitialLaw, RejectsNonPositiveStd) {
  InitialLaw law = InitialLaw::centered(2, 1.0, 0.0);
  EXPECT_THROW(law.validate(), ConfigError);
}

TEST(LocalVelocity, ZeroVelocitiesGiveZero) {
  PhaseEnsemble e = sample_initial(InitialLaw::centered(2, 0.2, 1.0), 50, 1);
  for (int k = 0; k < 2; ++k) {
    for (double& v : e.velocity_coord(k)) v = 0.0;
  }
  EXPECT_EQ(local_velocity(Vec{0.0, 0.0}, e, params()).norm(), 0.0);
}

TEST(LocalVelocity, SingleSourceAtQuery) {
  const ModelParams p = params();
  const Vec x{0.3, -0.1}, v{0.4, 0.2};
  const double c = mollifier(Vec{0.0, 0.0}, p);
  const Vec u = local_velocity(x, single(x, v), p);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(u[k], c * v[k] / (c + p.delta), 1e-14);
}

TEST(LocalVelocity, MatchesNaiveSum) {
  const ModelParams p = params();
  const PhaseEnsemble e = sample_initial(InitialLaw::centered(2, 0.5, 1.2), 700, 2);
  for (std::size_t i = 0; i < 20; ++i) {
    const Vec x = e.position(i);
    const Vec a = local_velocity(x, e, p), b = naive_local_velocity(x, e, p);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(a[k], b[k], 1e-12 * (1.0 + std::abs(b[k])));
  }
}

TEST(LocalVelocity, BelowTwoR) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    ModelParams p = params();
    p.epsilon = u(rng);
    p.delta = 0.01 * u(rng);
    p.r_cut = u(rng);
    const PhaseEnsemble e = sample_initial(InitialLaw::centered(2, 0.3, 3.0), 1 + trial % 64, trial);
    EXPECT_LT(local_velocity(e.position(0), e, p).norm(), 2.0 * p.r_cut);
  }
}

TEST(ConvolvedForce, SymmetricSourceCancels) {
  PhaseEnsemble e(2, 4);
  const Vec c{0.5, 0.5};
  const Vec offsets[] = {{0.3, 0.1}, {-0.3, -0.1}, {0.05, -0.2}, {-0.05, 0.2}};
  for (std::size_t j = 0; j < 4; ++j) e.set_position(j, c + offsets[j]);
  const Vec f = convolved_force(c, e, params());
  EXPECT_NEAR(f.norm(), 0.0, 1e-14);
}

TEST(ConvolvedForce, SingleSourceOuterBranch) {
  ModelParams p = params();
  p.epsilon = 0.1;
  const Vec f = convolved_force(Vec{0.0, 0.0}, single(Vec{2 * p.epsilon, 0.0}, Vec{0.0, 0.0}), p);
  // x - x_j = (-2 eps, 0)
  EXPECT_NEAR(f[0], -1.0 / (2 * p.epsilon), 1e-12);
  EXPECT_NEAR(f[1], 0.0, 1e-15);
}

TEST(ConvolvedForce, MatchesNaiveAndBound) {
  for (int d : {2, 3, 4}) {
    ModelParams p = params(d);
    p.epsilon = 0.2;
    const PhaseEnsemble e = sample_initial(InitialLaw::centered(d, 0.4, 1.0), 333, d);
    for (std::size_t i = 0; i < 10; ++i) {
      const Vec x = e.position(i);
      const Vec a = convolved_force(x, e, p), b = naive_force(x, e, p);
      EXPECT_NEAR((a - b).norm(), 0.0, 1e-12 * b.norm() + 1e-14);
      EXPECT_LE(a.norm(), newtonian_force_bound(p));
    }
  }
}

TEST(ConvolvedQ, Branches) {
  ModelParams p = params();
  p.epsilon = 0.1;
  p.lambda = 2.0;
  PhaseEnsemble far(2, 3);
  far.set_position(0, Vec{1.0, 0.0});
  far.set_position(1, Vec{0.0, -1.0});
  far.set_position(2, Vec{-0.6, 0.8});
  EXPECT_NEAR(convolved_q(Vec{0.0, 0.0}, far, p), 2.0 * 9.0 / 1.0, 1e-12);
  const Vec x{0.2, 0.2};
  EXPECT_NEAR(convolved_q(x, single(x, Vec{0.0, 0.0}), p), 2.0 * 9.0 / 0.01, 1e-9);
}

TEST(ConvolvedQ, MonteCarloMatchesIntegral) {
  // Sources uniform on the annulus 1 <= |y| <= 2, query at the origin with
  // 3 eps < 1: q = C_q |y|^-2 and integral = C_q ln 2 / (pi (4 - 1)) * 2 pi.
  ModelParams p = params();
  p.epsilon = 0.1;
  p.lambda = 1.0;
  const std::size_t m = 40000;
  PhaseEnsemble e(2, m);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double r = std::sqrt(1.0 + 3.0 * u(rng));
    const double a = 2.0 * M_PI * u(rng);
    e.set_position(j, Vec{r * std::cos(a), r * std::sin(a)});
  }
  const double exact = 9.0 * 2.0 * std::log(2.0) / 3.0;
  const double est = convolved_q(Vec{0.0, 0.0}, e, p);
  EXPECT_NEAR(est, exact, 5.0 / std::sqrt(static_cast<double>(m)) * exact);
}

TEST(ConvolvedGradMollifier, ZeroCases) {
  const ModelParams p = params();
  const Vec x{0.1, 0.1};
  EXPECT_EQ(convolved_grad_mollifier(x, single(x, Vec{1.0, 0.0}), p), 0.0);
  EXPECT_EQ(convolved_grad_mollifier(x, single(Vec{2.0, 0.0}, Vec{1.0, 0.0}), p), 0.0);
}

TEST(ConvolvedGradMollifier, MatchesQuadratureAgainstDensity) {
  // Sources uniform on the square [-1, 1]^2; the query at the origin sees
  // only the region |y| < eps, which lies inside the square, so the
  // integral is (1/4) integral |grad phi^eps| = (1/4) 2 pi int_0^eps r |phi'| dr.
  ModelParams p = params();
  p.epsilon = 0.5;
  const std::size_t m = 200000;
  PhaseEnsemble e(2, m);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t j = 0; j < m; ++j) e.set_position(j, Vec{u(rng), u(rng)});
  double radial = 0.0;
  const int steps = 20000;
  for (int k = 0; k < steps; ++k) {
    const double r = (k + 0.5) * p.epsilon / steps;
    radial += r * mollifier_grad(Vec{r, 0.0}, p).norm();
  }
  const double exact = 0.25 * 2.0 * M_PI * radial * p.epsilon / steps;
  const double est = convolved_grad_mollifier(Vec{0.0, 0.0}, e, p);
  EXPECT_NEAR(est, exact, 0.03 * exact);
}

TEST(EmpiricalQueries, PermutationInvariant) {
  const ModelParams p = params();
  const PhaseEnsemble e = sample_initial(InitialLaw::centered(2, 0.5, 1.0), 257, 12);
  std::vector<std::size_t> order(e.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(1));
  const PhaseEnsemble r = e.permuted(order);
  const Vec x{0.1, -0.2};
  EXPECT_NEAR((convolved_force(x, e, p) - convolved_force(x, r, p)).norm(), 0.0,
              1e-12 * convolved_force(x, e, p).norm());
  EXPECT_NEAR(convolved_q(x, e, p), convolved_q(x, r, p), 1e-12 * convolved_q(x, e, p));
  EXPECT_NEAR(convolved_grad_mollifier(x, e, p), convolved_grad_mollifier(x, r, p),
              1e-12 * convolved_grad_mollifier(x, e, p));
}

TEST(EmpiricalQueries, LinearInTheMeasure) {
  const ModelParams p = params();
  const PhaseEnsemble a = sample_initial(InitialLaw::centered(2, 0.5, 1.0), 300, 13);
  const PhaseEnsemble b = sample_initial(InitialLaw::centered(2, 0.7, 1.0), 300, 14);
  const PhaseEnsemble ab = PhaseEnsemble::concat(a, b);
  const Vec x{0.05, 0.3};
  const Vec f = (convolved_force(x, a, p) + convolved_force(x, b, p)) * 0.5;
  EXPECT_NEAR((convolved_force(x, ab, p) - f).norm(), 0.0, 1e-12 * f.norm());
  const double q = 0.5 * (convolved_q(x, a, p) + convolved_q(x, b, p));
  EXPECT_NEAR(convolved_q(x, ab, p), q, 1e-12 * q);
  const double g = 0.5 * (convolved_grad_mollifier(x, a, p) + convolved_grad_mollifier(x, b, p));
  EXPECT_NEAR(convolved_grad_mollifier(x, ab, p), g, 1e-12 * g);
}

TEST(EmpiricalMeasure, SelfLocalVelocityUsesOwnVelocity) {
  const ModelParams p = params();
  const PhaseEnsemble e = sample_initial(InitialLaw::centered(2, 0.3, 1.0), 64, 15);
  const EmpiricalMeasure m(e, p);
  const Vec x = e.position(3), v{0.7, -0.2};
  const auto a = m.alignment(x);
  const Vec u = m.local_velocity_self(x, v);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(u[k], v[k] * a.density / (a.density + p.delta), 1e-14);
}

TEST(AssumptionEstimates, ZeroVelocityAndFarSources) {
  const ModelParams p = params();
  PhaseEnsemble e = sample_initial(InitialLaw::centered(2, 0.3, 1.0), 32, 16);
  for (int k = 0; k < 2; ++k) {
    for (double& v : e.velocity_coord(k)) v = 0.0;
  }
  const auto q = default_query_points(e);
  EXPECT_EQ(assumption_estimates(e, p, q).sup_first_moment, 0.0);
  const std::vector<Vec> far = {Vec{50.0, 50.0}};
  const auto r = assumption_estimates(e, p, far);
  EXPECT_EQ(r.sup_grad_mollifier_conv, 0.0);
  EXPECT_EQ(r.query_count, 1u);
  EXPECT_THROW(assumption_estimates(e, p, std::vector<Vec>{}), ConfigError);
}

TEST(AssumptionEstimates, SingularStableUnderDoubling) {
  ModelParams p = params();
  p.epsilon = 0.05;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto box = [&](std::size_t m) {
    PhaseEnsemble e(2, m);
    for (std::size_t j = 0; j < m; ++j) e.set_position(j, Vec{u(rng), u(rng)});
    return e;
  };
  const std::vector<Vec> q = {Vec{0.5, 0.5}, Vec{0.3, 0.6}, Vec{0.7, 0.4}};
  const double a = assumption_estimates(box(4000), p, q).sup_singular_conv;
  const double b = assumption_estimates(box(8000), p, q).sup_singular_conv;
  EXPECT_NEAR(b / a, 1.0, 0.2);
}

TEST(AssumptionEstimates, DefaultQueriesSubsample) {
  const PhaseEnsemble e = sample_initial(InitialLaw::centered(2, 1.0, 1.0), 10000, 18);
  const auto q = default_query_points(e, 4096);
  EXPECT_LE(q.size(), 4096u);
  EXPECT_GE(q.size(), 2048u);
  EXPECT_EQ(q.front(), e.position(0));
}

TEST(SnapshotIo, RoundTripIsLossless) {
  PhaseEnsemble e = sample_initial(InitialLaw::centered(3, 1.0, 1.0), 25, 19);
  e.set_position(0, Vec{1e-300, -0.0, 1.0 / 3.0});
  std::stringstream s;
  write_ensemble_csv(s, e);
  const PhaseEnsemble back = read_ensemble_csv(s);
  ASSERT_EQ(back.size(), e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_EQ(back.position(i), e.position(i));
    EXPECT_EQ(back.velocity(i), e.velocity(i));
  }
}

TEST(SnapshotIo, HeaderAndErrors) {
  std::stringstream s;
  write_ensemble_csv(s, PhaseEnsemble(2, 1));
  std::string header;
  std::getline(s, header);
  EXPECT_EQ(header, "id,x1,x2,v1,v2");
  std::stringstream bad("id,x1,x2,v1,v2\n0,1,2,3\n");
  EXPECT_THROW(read_ensemble_csv(bad), ConfigError);
  std::stringstream word("id,x1,x2,v1,v2\n0,1,abc,3,4\n");
  EXPECT_THROW(read_ensemble_csv(word), ConfigError);
  std::stringstream wrong("id,y1,x2,v1,v2\n0,1,2,3,4\n");
  EXPECT_THROW(read_ensemble_csv(wrong), ConfigError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  for (double v : {1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}
