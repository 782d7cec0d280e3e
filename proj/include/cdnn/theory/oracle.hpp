#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace cdnn::theory {

using ScalarField = std::function<double(std::span<const double>)>;
using OutcomeField = std::function<double(double, std::span<const double>)>;

// Ground-truth nuisance functions of a data-generating process.
//
//   f(t, x)   potential-outcome mean E[Y(t) | x]
//   e0(x)     propensity P(T = 1 | x)
//   theta0(x) f(1, x) - f(0, x)
//   g0(x)     E[Y | x] = e0 f(1, x) + (1 - e0) f(0, x)
//
// The factory functions derive the redundant members from a minimal set so
// the consistency relations hold up to rounding.
struct NuisanceOracle {
  ScalarField g0;
  ScalarField e0;
  ScalarField theta0;
  OutcomeField f;
  double noise_sigma = 0.0;

  // f(t, x) = f0(x) + t * theta0(x); g0 by the mixture identity.
  static NuisanceOracle from_outcome_model(ScalarField f0, ScalarField theta0, ScalarField e0,
                                           double noise_sigma);
  // f(t, x) = g0(x) + theta0(x) * (t - e0(x)).
  static NuisanceOracle from_nuisances(ScalarField g0, ScalarField e0, ScalarField theta0,
                                       double noise_sigma);
};

// e0(x) f(1, x) + (1 - e0(x)) f(0, x).
double marginal_outcome(const NuisanceOracle& oracle, std::span<const double> x);

struct ResidualizedH {
  double from_definition = 0.0;  // f(t, x) - g0(x)
  double from_lemma = 0.0;       // theta0(x) (t - e0(x))
};

// Both forms of h(t, x). Throws IdentityViolation when they differ by more
// than `tolerance`, which means the oracle itself is inconsistent.
ResidualizedH residualized_h(const NuisanceOracle& oracle, double t, std::span<const double> x,
                             double tolerance = 1e-12);

// Throws IdentityViolation unless f(1)-f(0) = theta0, the mixture equals g0
// (both to `tolerance`) and 0 < e0 < 1 at x.
void check_consistency(const NuisanceOracle& oracle, std::span<const double> x,
                       double tolerance = 1e-12);

// Random affine / sigmoid nuisances on R^d with e0 kept inside (0.05, 0.95).
NuisanceOracle random_oracle(std::size_t d, std::mt19937_64& rng);

struct ConditionalDraws {
  std::vector<double> t;
  std::vector<double> y;
};

// n draws of (T, Y) from the oracle's law conditional on x:
// T ~ Bernoulli(e0(x)), Y = f(T, x) + noise_sigma * N(0, 1).
ConditionalDraws draw_conditional(const NuisanceOracle& oracle, std::span<const double> x,
                                  std::size_t n, std::uint64_t seed);

}  // namespace cdnn::theory
