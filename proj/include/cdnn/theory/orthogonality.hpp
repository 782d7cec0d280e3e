#pragma once

#include "cdnn/theory/oracle.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cdnn::theory {

// One observation (Y, T, x).
struct ScoreInput {
  double y = 0.0;
  double t = 0.0;
  std::vector<double> x;
};

// (Y - g - theta (T - e)) (T - e). Requires e in (0, 1).
double score_psi(const ScoreInput& w, double theta, double g, double e);

// (Y - g - theta T) T: regression score without treatment residualization.
double naive_score(const ScoreInput& w, double theta, double g);

// Direction eta_hat - eta0 = [g_hat - g0, e_hat - e0].
struct NuisancePerturbation {
  std::string label;
  ScalarField delta_g;
  ScalarField delta_e;
};

// Propensity after the full perturbation must stay in [kPropensityGuard, 1 - kPropensityGuard].
inline constexpr double kPropensityGuard = 1e-3;

// Throws InvalidPerturbation when e0(x) + delta_e(x) leaves the guard band.
void validate_perturbation(const NuisanceOracle& oracle, const NuisancePerturbation& p,
                           std::span<const double> x);

enum class GateauxMethod { finite_difference, analytic };

struct MonteCarloEstimate {
  double estimate = 0.0;
  double mc_stderr = 0.0;

  bool within(double sigmas) const;  // |estimate| <= sigmas * stderr
};

inline constexpr std::size_t kMinGateauxSamples = 10'000;

// Directional derivative in tau at 0 of E[psi(W, theta0, eta0 + tau (eta - eta0)) | x].
//
// finite_difference: central difference with step `tau_step`, with the same
// draws of (T, Y) at +tau and -tau. analytic: the closed form
//   (g0 - g + theta0 (e - e0)) E[T - e0 | x] + (e0 - e) (E[Y - g0 | x] - theta0 E[T - e0 | x])
// with exact conditional expectations (stderr 0).
MonteCarloEstimate gateaux_derivative(const NuisanceOracle& oracle,
                                      const NuisancePerturbation& perturbation,
                                      std::span<const double> x, std::size_t n_samples,
                                      GateauxMethod method, std::uint64_t seed,
                                      double tau_step = 1e-4);

// Same finite-difference machinery applied to naive_score. This score is not
// orthogonal to g: along a constant delta_g = c the derivative is -c e0(x).
MonteCarloEstimate non_orthogonal_control(const NuisanceOracle& oracle,
                                          const NuisancePerturbation& perturbation,
                                          std::span<const double> x, std::size_t n_samples,
                                          std::uint64_t seed, double tau_step = 1e-4);

// Monte-Carlo mean of psi at the true nuisances, conditional on x.
MonteCarloEstimate moment_condition(const NuisanceOracle& oracle, std::span<const double> x,
                                    std::size_t n_samples, std::uint64_t seed);

// Ten directions on R^d: constants, single-coordinate linear terms and radial
// bumps, in g, in e and mixed.
std::vector<NuisancePerturbation> standard_perturbations(std::size_t d);

// Constant g offset of size c, no propensity change.
NuisancePerturbation constant_g_shift(double c);

}  // namespace cdnn::theory
