#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "meanfield/errors.hpp"
#include "meanfield/scaling.hpp"

using namespace meanfield;

namespace {

ExponentSet worked() {
  ExponentSet e;
  e.theta = 0.04;
  e.vartheta = 0.02;
  e.alpha = 0.06;
  e.kappa = 0.12;
  e.gamma_exp = 0.05;
  e.eta = 0.12;
  e.mu = 0.05;
  return e;
}

bool has(const ScalingReport& r, const std::string& name) {
  return std::find(r.violations.begin(), r.violations.end(), name) != r.violations.end();
}

// Second evaluator of the six rate terms, written out longhand.
std::array<double, 6> terms_by_hand(int d, const ExponentSet& e) {
  const double th = e.theta, a = e.alpha;
  return {1.0 - 5.0 * (d - 1) * th - 4.0 * e.kappa - a,
          1.0 - (3.0 * d - 1) * th - 4.0 * e.gamma_exp - a,
          1.0 - (5.0 * d + 1) * th - 4.0 * e.eta - a,
          1.0 - (5.0 * d + 3) * th - 4.0 * e.mu - a,
          e.kappa - a - (d - 1) * th,
          e.eta - a - (d - 1) * th};
}

}  // namespace

TEST(DeriveScaling, Arithmetic) {
  EXPECT_NEAR(derive_scaling(256, 0.05, 0.02).epsilon, 0.757858, 1e-6);
  const ScaledParams s = derive_scaling(1e4, 0.04, 0.01);
  EXPECT_NEAR(s.delta, 3.29505, 1e-5);
  EXPECT_NEAR(s.r_cut, 0.303486, 1e-6);
  EXPECT_EQ(s.r_cut, 1.0 / s.delta);
}

TEST(DeriveScaling, RejectsSmallN) {
  EXPECT_THROW(derive_scaling(1.0, 0.04, 0.02), ConfigError);
  EXPECT_THROW(derive_scaling(64, 0.0, 0.02), ConfigError);
  EXPECT_THROW(derive_scaling(64, 0.04, 0.0), ConfigError);
}

TEST(DeriveScaling, Monotone) {
  for (double n = 2; n < 1e6; n *= 3) {
    const auto a = derive_scaling(n, 0.04, 0.02), b = derive_scaling(3 * n, 0.04, 0.02);
    EXPECT_GT(a.epsilon, b.epsilon);
    EXPECT_GT(a.delta, b.delta);
    EXPECT_GT(a.epsilon, derive_scaling(n, 0.05, 0.02).epsilon);
    EXPECT_GT(a.delta, derive_scaling(n, 0.04, 0.03).delta);
  }
}

TEST(ValidateExponents, WorkedSetAccepted) {
  const ScalingReport r = validate_exponents(2, worked());
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_NEAR(r.n_rate, 0.02, 1e-15);
  const auto hand = terms_by_hand(2, worked());
  const double expected[6] = {0.26, 0.54, 0.02, 0.22, 0.02, 0.02};
  for (int k = 0; k < 6; ++k) {
    EXPECT_NEAR(r.n_terms[k], hand[k], 1e-14);
    EXPECT_NEAR(r.n_terms[k], expected[k], 1e-14);
  }
  EXPECT_NEAR(compute_n(2, worked()), 0.02, 1e-15);
}

TEST(ValidateExponents, AlphaInterval) {
  const ScalingReport r = validate_exponents(2, worked());
  const auto it = std::find_if(r.constraints.begin(), r.constraints.end(),
                               [](const Constraint& c) { return c.name == "alpha"; });
  ASSERT_NE(it, r.constraints.end());
  EXPECT_NEAR(it->lower, 0.04, 1e-15);
  EXPECT_NEAR(it->upper, 0.08, 1e-15);
  EXPECT_TRUE(it->ok);
}

TEST(ValidateExponents, ThetaBoundaryIsOpen) {
  ExponentSet e = worked();
  e.theta = 1.0 / 20.0;
  const ScalingReport r = validate_exponents(2, e);
  EXPECT_FALSE(r.valid);
  EXPECT_TRUE(has(r, "theta_upper"));
  EXPECT_THROW(compute_n(2, e), ConfigError);
}

TEST(ValidateExponents, KappaJustAboveLower) {
  ExponentSet e = worked();
  e.kappa = 0.101;
  EXPECT_TRUE(validate_exponents(2, e).valid);
  e.kappa = 0.1;  // exactly (d-1) theta + alpha
  EXPECT_TRUE(has(validate_exponents(2, e), "kappa_lower"));
}

TEST(ValidateExponents, NamedViolations) {
  ExponentSet e = worked();
  e.alpha = 0.03;
  EXPECT_TRUE(has(validate_exponents(2, e), "alpha_lower"));
  e = worked();
  e.vartheta = 0.05;
  EXPECT_TRUE(has(validate_exponents(2, e), "vartheta_upper"));
  e = worked();
  e.mu = 0.2;
  EXPECT_TRUE(has(validate_exponents(2, e), "mu_upper"));
  EXPECT_THROW(validate_exponents(1, worked()), ConfigError);
}

TEST(ValidateExponents, ThreeDimensions) {
  ExponentSet e = worked();
  e.theta = 0.02;  // < 1/29
  e.vartheta = 0.01;
  e.alpha = 0.04;  // (0.02, (1 - 24 * 0.02) / 5 = 0.104)
  e.kappa = 0.09;  // ((d-1) theta + alpha = 0.08, ...)
  e.eta = 0.09;
  const ScalingReport r = validate_exponents(3, e);
  EXPECT_TRUE(r.valid);
  const auto hand = terms_by_hand(3, e);
  EXPECT_NEAR(r.n_rate, *std::min_element(hand.begin(), hand.end()), 1e-14);
}

TEST(ComputeN, SymmetricKappaEta) {
  ExponentSet e = worked();
  e.kappa = e.eta = 0.11;
  const auto t = n_terms(2, e);
  EXPECT_EQ(t[4], t[5]);
}

TEST(ComputeN, PiecewiseLinearInKappa) {
  ExponentSet e = worked();
  e.eta = 0.124;
  double prev = -1.0;
  // Lowering kappa raises term 1 while term 5 falls; n follows the smaller.
  for (double kappa : {0.18, 0.16, 0.14, 0.12}) {
    e.kappa = kappa;
    const double n = compute_n(2, e);
    const auto hand = terms_by_hand(2, e);
    EXPECT_NEAR(n, *std::min_element(hand.begin(), hand.end()), 1e-14);
    if (prev >= 0.0 && hand[0] < hand[4]) {
      EXPECT_GT(n, prev);
    }
    prev = n;
  }
}

TEST(ComputeN, PositiveOrFlaggedForRandomValidSets) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto inside = [&](double lo, double hi) { return lo + (hi - lo) * (0.02 + 0.96 * u(rng)); };
  int valid = 0;
  for (int d : {2, 3}) {
    for (int k = 0; k < 2000; ++k) {
      ExponentSet e;
      e.theta = inside(0.0, 1.0 / (9 * d + 2));
      e.vartheta = inside(0.0, e.theta);
      e.alpha = inside(e.theta, (1 - (9 * d - 3) * e.theta) / 5);
      const double lo = (d - 1) * e.theta + e.alpha;
      e.kappa = inside(lo, (1 - 5 * (d - 1) * e.theta - e.alpha) / 4);
      e.gamma_exp = inside(0.0, (1 - (3 * d - 1) * e.theta - e.alpha) / 4);
      e.eta = inside(lo, (1 - (5 * d + 1) * e.theta - e.alpha) / 4);
      e.mu = inside(0.0, (1 - (5 * d + 3) * e.theta) / 4);
      const ScalingReport r = validate_exponents(d, e);
      if (!r.valid) continue;
      ++valid;
      if (r.n_rate <= 0.0) {
        EXPECT_FALSE(r.discrepancies.empty());
        // only the mollifier term can fail, since its interval ignores alpha
        const auto hand = terms_by_hand(d, e);
        EXPECT_LE(hand[3], 0.0);
      } else {
        EXPECT_TRUE(r.discrepancies.empty());
      }
    }
  }
  EXPECT_GT(valid, 3000);
}

TEST(TheoreticalBound, Shape) {
  EXPECT_NEAR(theoretical_bound(1000, 0.0, 2.0, 0.02, 0.1), 2.0 * std::pow(1000.0, -0.1), 1e-15);
  EXPECT_NEAR(theoretical_bound(1000, 1.0, 1.0, 1e-12, 0.1), std::exp(1.0) * std::pow(1000.0, -0.1),
              1e-9);
  EXPECT_LT(theoretical_bound(1000, 0.5, 1.0, 0.02, 0.1), theoretical_bound(1000, 0.6, 1.0, 0.02, 0.1));
  EXPECT_LT(theoretical_bound(1000, 0.5, 1.0, 0.02, 0.1), theoretical_bound(1000, 0.5, 1.0, 0.03, 0.1));
}

TEST(VarthetaAdmissibility, Reported) {
  const auto a = vartheta_admissibility(0.02, 1.0, 0.5, worked());
  EXPECT_NEAR(a.upper, 0.04, 1e-15);
  EXPECT_TRUE(a.admissible);
  const auto tight = vartheta_admissibility(0.02, 1.0, 2.0, worked());
  EXPECT_NEAR(tight.upper, 0.01, 1e-15);
  EXPECT_FALSE(tight.admissible);
}

TEST(ScalingReport, FillsNDependentFields) {
  const ScalingReport r = scaling_report(2, 1024, worked());
  EXPECT_TRUE(r.valid);
  EXPECT_DOUBLE_EQ(r.epsilon, std::pow(1024.0, -0.04));
  EXPECT_DOUBLE_EQ(r.r_cut, 1.0 / r.delta);
}
