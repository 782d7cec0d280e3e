#include "cdnn/theory/orthogonality.hpp"

#include "cdnn/error.hpp"

#include <cmath>
#include <sstream>

namespace cdnn::theory {

double score_psi(const ScoreInput& w, double theta, double g, double e) {
  const double treatment_residual = w.t - e;
  return (w.y - g - theta * treatment_residual) * treatment_residual;
}

double naive_score(const ScoreInput& w, double theta, double g) {
  return (w.y - g - theta * w.t) * w.t;
}

void validate_perturbation(const NuisanceOracle& oracle, const NuisancePerturbation& p,
                           std::span<const double> x) {
  const double e = oracle.e0(x) + p.delta_e(x);
  if (!(e >= kPropensityGuard && e <= 1.0 - kPropensityGuard)) {
    std::ostringstream msg;
    msg << "perturbation '" << p.label << "' moves the propensity to " << e;
    throw InvalidPerturbation(msg.str());
  }
}

bool MonteCarloEstimate::within(double sigmas) const {
  return std::abs(estimate) <= sigmas * mc_stderr;
}

namespace {

// Mean and standard error of per-draw central differences of `score(tau)`.
template <typename Score>
MonteCarloEstimate central_difference_mean(const ConditionalDraws& draws, double tau_step,
                                           Score score) {
  const std::size_t n = draws.t.size();
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d =
        (score(draws.t[i], draws.y[i], tau_step) - score(draws.t[i], draws.y[i], -tau_step)) /
        (2.0 * tau_step);
    const double delta = d - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (d - mean);
  }
  const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

void require_samples(std::size_t n) {
  if (n < kMinGateauxSamples)
    throw ConfigError("Gateaux derivative needs at least " +
                      std::to_string(kMinGateauxSamples) + " samples");
}

}  // namespace

MonteCarloEstimate gateaux_derivative(const NuisanceOracle& oracle,
                                      const NuisancePerturbation& perturbation,
                                      std::span<const double> x, std::size_t n_samples,
                                      GateauxMethod method, std::uint64_t seed,
                                      double tau_step) {
  validate_perturbation(oracle, perturbation, x);
  const double g0 = oracle.g0(x);
  const double e0 = oracle.e0(x);
  const double theta0 = oracle.theta0(x);
  const double dg = perturbation.delta_g(x);
  const double de = perturbation.delta_e(x);

  if (method == GateauxMethod::analytic) {
    const double g = g0 + dg;
    const double e = e0 + de;
    const double treat_residual_mean = e0 - e0;  // E[T | x] = e0
    const double outcome_residual_mean = marginal_outcome(oracle, x) - g0;
    const double value = (g0 - g + theta0 * (e - e0)) * treat_residual_mean +
                         (e0 - e) * (outcome_residual_mean - theta0 * treat_residual_mean);
    return {value, 0.0};
  }

  require_samples(n_samples);
  const ConditionalDraws draws = draw_conditional(oracle, x, n_samples, seed);
  return central_difference_mean(draws, tau_step, [&](double t, double y, double tau) {
    const ScoreInput w{y, t, {}};
    return score_psi(w, theta0, g0 + tau * dg, e0 + tau * de);
  });
}

MonteCarloEstimate non_orthogonal_control(const NuisanceOracle& oracle,
                                          const NuisancePerturbation& perturbation,
                                          std::span<const double> x, std::size_t n_samples,
                                          std::uint64_t seed, double tau_step) {
  validate_perturbation(oracle, perturbation, x);
  require_samples(n_samples);
  const double g0 = oracle.g0(x);
  const double theta0 = oracle.theta0(x);
  const double dg = perturbation.delta_g(x);
  const ConditionalDraws draws = draw_conditional(oracle, x, n_samples, seed);
  return central_difference_mean(draws, tau_step, [&](double t, double y, double tau) {
    const ScoreInput w{y, t, {}};
    return naive_score(w, theta0, g0 + tau * dg);
  });
}

MonteCarloEstimate moment_condition(const NuisanceOracle& oracle, std::span<const double> x,
                                    std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw ConfigError("moment check needs at least 2 samples");
  const double g0 = oracle.g0(x);
  const double e0 = oracle.e0(x);
  const double theta0 = oracle.theta0(x);
  const ConditionalDraws draws = draw_conditional(oracle, x, n_samples, seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double v = score_psi({draws.y[i], draws.t[i], {}}, theta0, g0, e0);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(n_samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_samples))};
}

namespace {

ScalarField constant(double c) {
  return [c](std::span<const double>) { return c; };
}

ScalarField linear(std::size_t coord, double slope) {
  return [coord, slope](std::span<const double> x) { return slope * x[coord]; };
}

ScalarField bump(double amplitude, double centre) {
  return [amplitude, centre](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += (v - centre) * (v - centre);
    return amplitude * std::exp(-0.5 * r2);
  };
}

}  // namespace

NuisancePerturbation constant_g_shift(double c) {
  return {"g+" + std::to_string(c), constant(c), constant(0.0)};
}

std::vector<NuisancePerturbation> standard_perturbations(std::size_t d) {
  const std::size_t second = d > 1 ? 1 : 0;
  const std::size_t last = d - 1;
  return {
      {"g const +0.5", constant(0.5), constant(0.0)},
      {"g const -1", constant(-1.0), constant(0.0)},
      {"e const +0.05", constant(0.0), constant(0.05)},
      {"g +0.5, e -0.05", constant(0.5), constant(-0.05)},
      {"g linear x0", linear(0, 0.3), constant(0.0)},
      {"e linear x1", constant(0.0), linear(second, 0.02)},
      {"g and e linear x_last", linear(last, -0.4), linear(last, 0.03)},
      {"g radial bump", bump(0.8, 0.0), constant(0.0)},
      {"e radial bump", constant(0.0), bump(0.04, 1.0)},
      {"g const +1, e bump", constant(1.0), bump(-0.03, 0.0)},
  };
}

}  // namespace cdnn::theory
