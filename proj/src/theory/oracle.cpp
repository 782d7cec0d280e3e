#include "cdnn/theory/oracle.hpp"

#include "cdnn/error.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace cdnn::theory {

NuisanceOracle NuisanceOracle::from_outcome_model(ScalarField f0, ScalarField theta0,
                                                  ScalarField e0, double noise_sigma) {
  NuisanceOracle o;
  o.theta0 = theta0;
  o.e0 = e0;
  o.noise_sigma = noise_sigma;
  o.f = [f0, theta0](double t, std::span<const double> x) { return f0(x) + t * theta0(x); };
  o.g0 = [f = o.f, e0](std::span<const double> x) {
    const double e = e0(x);
    return e * f(1.0, x) + (1.0 - e) * f(0.0, x);
  };
  return o;
}

NuisanceOracle NuisanceOracle::from_nuisances(ScalarField g0, ScalarField e0, ScalarField theta0,
                                              double noise_sigma) {
  NuisanceOracle o;
  o.g0 = g0;
  o.e0 = e0;
  o.theta0 = theta0;
  o.noise_sigma = noise_sigma;
  o.f = [g0, e0, theta0](double t, std::span<const double> x) {
    return g0(x) + theta0(x) * (t - e0(x));
  };
  return o;
}

double marginal_outcome(const NuisanceOracle& oracle, std::span<const double> x) {
  const double e = oracle.e0(x);
  return e * oracle.f(1.0, x) + (1.0 - e) * oracle.f(0.0, x);
}

ResidualizedH residualized_h(const NuisanceOracle& oracle, double t, std::span<const double> x,
                             double tolerance) {
  ResidualizedH h;
  h.from_definition = oracle.f(t, x) - oracle.g0(x);
  h.from_lemma = oracle.theta0(x) * (t - oracle.e0(x));
  if (!(std::abs(h.from_definition - h.from_lemma) <= tolerance)) {
    std::ostringstream msg;
    msg << "h(t, x) identity violated: f - g0 = " << h.from_definition
        << ", theta0 (t - e0) = " << h.from_lemma;
    throw IdentityViolation(msg.str());
  }
  return h;
}

void check_consistency(const NuisanceOracle& oracle, std::span<const double> x,
                       double tolerance) {
  const double e = oracle.e0(x);
  if (!(e > 0.0 && e < 1.0)) throw IdentityViolation("propensity outside (0, 1)");
  const double effect = oracle.f(1.0, x) - oracle.f(0.0, x);
  if (!(std::abs(effect - oracle.theta0(x)) <= tolerance))
    throw IdentityViolation("f(1, x) - f(0, x) differs from theta0(x)");
  if (!(std::abs(marginal_outcome(oracle, x) - oracle.g0(x)) <= tolerance))
    throw IdentityViolation("mixture e0 f(1) + (1 - e0) f(0) differs from g0(x)");
}

namespace {

struct Affine {
  double intercept = 0.0;
  std::vector<double> slope;
  double operator()(std::span<const double> x) const {
    double s = intercept;
    for (std::size_t i = 0; i < slope.size(); ++i) s += slope[i] * x[i];
    return s;
  }
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Affine random_affine(std::size_t d, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Affine a;
  a.intercept = u(rng);
  for (std::size_t i = 0; i < d; ++i) a.slope.push_back(u(rng));
  return a;
}

ScalarField random_field(std::size_t d, std::mt19937_64& rng) {
  std::bernoulli_distribution use_sigmoid(0.5);
  Affine inner = random_affine(d, 1.5, rng);
  if (!use_sigmoid(rng)) return inner;
  std::uniform_real_distribution<double> amp(-3.0, 3.0);
  const double a = amp(rng);
  const double b = amp(rng);
  return [inner, a, b](std::span<const double> x) { return a + b * sigmoid(inner(x)); };
}

}  // namespace

NuisanceOracle random_oracle(std::size_t d, std::mt19937_64& rng) {
  ScalarField g0 = random_field(d, rng);
  ScalarField theta0 = random_field(d, rng);
  const Affine logit = random_affine(d, 1.0, rng);
  ScalarField e0 = [logit](std::span<const double> x) {
    return 0.05 + 0.9 * sigmoid(logit(x));
  };
  std::uniform_real_distribution<double> sigma(0.0, 1.0);
  return NuisanceOracle::from_nuisances(g0, e0, theta0, sigma(rng));
}

ConditionalDraws draw_conditional(const NuisanceOracle& oracle, std::span<const double> x,
                                  std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution treat(oracle.e0(x));
  std::normal_distribution<double> noise(0.0, 1.0);
  const double y1 = oracle.f(1.0, x);
  const double y0 = oracle.f(0.0, x);
  ConditionalDraws out;
  out.t.reserve(n);
  out.y.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool t = treat(rng);
    out.t.push_back(t ? 1.0 : 0.0);
    out.y.push_back((t ? y1 : y0) + oracle.noise_sigma * noise(rng));
  }
  return out;
}

}  // namespace cdnn::theory
