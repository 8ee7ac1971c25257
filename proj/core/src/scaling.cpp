#include "meanfield/scaling.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "meanfield/errors.hpp"

namespace meanfield {
namespace {

using Rational = boost::multiprecision::cpp_rational;
using boost::multiprecision::cpp_int;

// The exact rational written by the shortest decimal form of value, so that
// 0.05 compares equal to 1/20.
Rational exact_decimal(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  const std::string text(buf, end);

  cpp_int digits = 0;
  long exponent = 0;
  bool negative = false;
  bool after_point = false;
  std::size_t pos = 0;
  if (pos < text.size() && text[pos] == '-') {
    negative = true;
    ++pos;
  }
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      after_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      if (after_point) --exponent;
    } else if (c == 'e' || c == 'E') {
      exponent += std::stol(text.substr(pos + 1));
      break;
    } else {
      throw ConfigError("exponent value is not a finite decimal: " + text);
    }
  }
  Rational out(digits);
  cpp_int scale = 1;
  for (long k = 0; k < std::labs(exponent); ++k) scale *= 10;
  out = exponent >= 0 ? out * Rational(scale) : out / Rational(scale);
  return negative ? -out : out;
}

struct ExactExponents {
  Rational theta, vartheta, alpha, kappa, gamma, eta, mu;
};

ExactExponents exact(const ExponentSet& e) {
  for (double v : {e.theta, e.vartheta, e.alpha, e.kappa, e.gamma_exp, e.eta, e.mu}) {
    if (!std::isfinite(v)) throw ConfigError("exponents must be finite");
  }
  return {exact_decimal(e.theta), exact_decimal(e.vartheta), exact_decimal(e.alpha),
          exact_decimal(e.kappa), exact_decimal(e.gamma_exp), exact_decimal(e.eta),
          exact_decimal(e.mu)};
}

std::array<Rational, 6> exact_terms(int d, const ExactExponents& x) {
  return {1 - 5 * (d - 1) * x.theta - 4 * x.kappa - x.alpha,
          1 - (3 * d - 1) * x.theta - 4 * x.gamma - x.alpha,
          1 - (5 * d + 1) * x.theta - 4 * x.eta - x.alpha,
          1 - (5 * d + 3) * x.theta - 4 * x.mu - x.alpha,
          x.kappa - x.alpha - (d - 1) * x.theta,
          x.eta - x.alpha - (d - 1) * x.theta};
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace

ScaledParams derive_scaling(double n, double theta, double vartheta) {
  if (!(n >= 2.0)) throw ConfigError("derive_scaling: N must be >= 2");
  if (!(theta > 0.0)) throw ConfigError("derive_scaling: theta must be > 0");
  if (!(vartheta > 0.0)) throw ConfigError("derive_scaling: vartheta must be > 0");
  const double epsilon = std::pow(n, -theta);
  const double delta = 1.0 / std::sqrt(vartheta * std::log(n));
  return {epsilon, delta, 1.0 / delta};
}

ScalingReport validate_exponents(int dim, const ExponentSet& e) {
  if (dim < 2) throw ConfigError("d must satisfy d >= 2");
  const int d = dim;
  const ExactExponents x = exact(e);

  ScalingReport report;
  report.dim = d;
  auto check = [&](const std::string& name, const Rational& lower, const Rational& value,
                   const Rational& upper) {
    const bool above_lower = value > lower;
    const bool below_upper = value < upper;
    report.constraints.push_back(
        {name, to_double(lower), to_double(value), to_double(upper), above_lower && below_upper});
    if (!above_lower) report.violations.push_back(name + "_lower");
    if (!below_upper) report.violations.push_back(name + "_upper");
  };

  check("theta", 0, x.theta, Rational(1, 9 * d + 2));
  check("alpha", x.theta, x.alpha, (1 - (9 * d - 3) * x.theta) / 5);
  check("kappa", (d - 1) * x.theta + x.alpha, x.kappa,
        (1 - 5 * (d - 1) * x.theta - x.alpha) / 4);
  check("gamma_exp", 0, x.gamma, (1 - (3 * d - 1) * x.theta - x.alpha) / 4);
  check("eta", (d - 1) * x.theta + x.alpha, x.eta, (1 - (5 * d + 1) * x.theta - x.alpha) / 4);
  check("mu", 0, x.mu, (1 - (5 * d + 3) * x.theta) / 4);
  check("vartheta", 0, x.vartheta, x.theta);
  report.valid = report.violations.empty();

  if (report.valid) {
    const auto terms = exact_terms(d, x);
    Rational n = terms[0];
    for (std::size_t k = 0; k < terms.size(); ++k) {
      report.n_terms[k] = to_double(terms[k]);
      n = std::min(n, terms[k]);
    }
    report.n_rate = to_double(n);
    if (n <= 0) {
      // The mu interval does not subtract alpha, so the fourth rate term can
      // be non-positive inside every stated interval.
      report.discrepancies.push_back(
          "n_rate <= 0 although every interval holds (binding term 1-(5d+3)theta-4mu-alpha "
          "when mu >= (1-(5d+3)theta-alpha)/4)");
    }
  }
  return report;
}

std::array<double, 6> n_terms(int dim, const ExponentSet& e) {
  const ScalingReport report = validate_exponents(dim, e);
  if (!report.valid) throw ConfigError("exponent set is not valid; run validate_exponents");
  return report.n_terms;
}

double compute_n(int dim, const ExponentSet& e) {
  const ScalingReport report = validate_exponents(dim, e);
  if (!report.valid) throw ConfigError("exponent set is not valid; run validate_exponents");
  return report.n_rate;
}

ScalingReport scaling_report(int dim, double n, const ExponentSet& e) {
  ScalingReport report = validate_exponents(dim, e);
  const ScaledParams s = derive_scaling(n, e.theta, e.vartheta);
  report.n_particles = n;
  report.epsilon = s.epsilon;
  report.delta = s.delta;
  report.r_cut = s.r_cut;
  return report;
}

double theoretical_bound(double n_particles, double t, double c_const, double vartheta,
                         double n_rate) {
  return c_const * std::exp((c_const + c_const * vartheta * std::log(n_particles)) * t) *
         std::pow(n_particles, -n_rate);
}

VarthetaAdmissibility vartheta_admissibility(double n_rate, double c_const, double t,
                                             const ExponentSet& e) {
  const double upper = std::min(n_rate / (c_const * t), e.theta);
  return {upper, e.vartheta > 0.0 && e.vartheta < upper};
}

}  // namespace meanfield
