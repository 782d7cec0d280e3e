#include "doctest.h"

#include "cdnn/data/dgp.hpp"
#include "cdnn/error.hpp"
#include "cdnn/theory/oracle.hpp"
#include "cdnn/theory/orthogonality.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace cdnn;
using namespace cdnn::theory;

namespace {

ScalarField constant(double c) {
  return [c](std::span<const double>) { return c; };
}

NuisanceOracle constant_oracle(double f0, double theta, double e, double sigma = 0.0) {
  return NuisanceOracle::from_outcome_model(constant(f0), constant(theta), constant(e), sigma);
}

const std::vector<double> kOrigin{0.0, 0.0, 0.0};

}  // namespace

TEST_CASE("marginal_outcome: degenerate and substituted mixtures") {
  const auto none = constant_oracle(1.25, 3.0, 0.0);
  CHECK(marginal_outcome(none, kOrigin) == none.f(0.0, kOrigin));

  // f(1) = 2, f(0) = 1, e = 0.5.
  const auto half = constant_oracle(1.0, 1.0, 0.5);
  CHECK(marginal_outcome(half, kOrigin) == 1.5);
}

TEST_CASE("marginal_outcome matches the Monte-Carlo mean of Y") {
  const auto oracle = data::oracle_of(data::named_dgp("confound-hetero", 3, 0.5, 1));
  const std::vector<double> x{0.3, -0.7, 1.1};
  const auto draws = draw_conditional(oracle, x, 100'000, 42);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < draws.y.size(); ++i) {
    const double d = draws.y[i] - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (draws.y[i] - mean);
  }
  const double se = std::sqrt(m2 / (draws.y.size() - 1) / draws.y.size());
  CHECK(std::abs(mean - marginal_outcome(oracle, x)) <= 3.0 * se);
}

TEST_CASE("residualized_h: both forms") {
  const auto oracle = constant_oracle(0.5, 1.0, 0.25);
  const auto h1 = residualized_h(oracle, 1.0, kOrigin);
  const auto h0 = residualized_h(oracle, 0.0, kOrigin);
  CHECK(h1.from_lemma == 0.75);
  CHECK(h0.from_lemma == -0.25);
  CHECK(h1.from_definition == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(h0.from_definition == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("residualized_h: arm difference is theta0") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 200; ++k) {
    const auto oracle = random_oracle(3, rng);
    const std::vector<double> x{normal(rng), normal(rng), normal(rng)};
    const auto h1 = residualized_h(oracle, 1.0, x);
    const auto h0 = residualized_h(oracle, 0.0, x);
    CHECK(std::abs((h1.from_lemma - h0.from_lemma) - oracle.theta0(x)) <= 1e-12);
    CHECK(std::abs((h1.from_definition - h0.from_definition) - oracle.theta0(x)) <= 1e-12);
  }
}

TEST_CASE("residualized_h: zero effect gives zero for both arms") {
  const auto oracle = constant_oracle(2.7, 0.0, 0.3);
  for (double t : {0.0, 1.0}) {
    const auto h = residualized_h(oracle, t, kOrigin);
    CHECK(h.from_lemma == 0.0);
    CHECK(std::abs(h.from_definition) <= 1e-15);
  }
}

TEST_CASE("residualized_h: an inconsistent oracle is reported") {
  auto oracle = constant_oracle(1.0, 2.0, 0.5);
  oracle.g0 = constant(0.0);  // breaks the mixture identity
  CHECK_THROWS_AS(residualized_h(oracle, 1.0, kOrigin), IdentityViolation);
  CHECK_THROWS_AS(check_consistency(oracle, kOrigin), IdentityViolation);
}

TEST_CASE("property: lemma and mixture identities over 1000 random oracles") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto oracle = random_oracle(4, rng);
    std::vector<double> x(4);
    for (auto& v : x) v = normal(rng);
    const double t = coin(rng) ? 1.0 : 0.0;
    const auto h = residualized_h(oracle, t, x);
    worst = std::max(worst, std::abs(h.from_definition - h.from_lemma));
    worst = std::max(worst, std::abs(marginal_outcome(oracle, x) - oracle.g0(x)));
    CHECK_NOTHROW(check_consistency(oracle, x));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("score_psi: exact evaluations") {
  // g0 = 1, theta0 = 2, e0 = 0.5 and a noiseless treated unit: Y = 1 + 2 * 0.5.
  CHECK(score_psi({2.0, 1.0, {}}, 2.0, 1.0, 0.5) == 0.0);
  CHECK(score_psi({0.0, 0.0, {}}, 2.0, 1.0, 0.5) == 0.0);
  CHECK(score_psi({3.0, 1.0, {}}, 2.0, 1.0, 0.5) == 0.5);
}

TEST_CASE("moment condition holds at the truth") {
  const auto oracle = data::oracle_of(data::named_dgp("confound-hetero", 3, 0.5, 3));
  for (const std::vector<double>& x :
       {std::vector<double>{0.0, 0.0, 0.0}, {1.0, -1.0, 0.5}, {-1.2, 0.4, 2.0}}) {
    const auto m = moment_condition(oracle, x, 100'000, 11);
    CHECK(m.within(3.0));
    CHECK(m.mc_stderr > 0.0);
  }
}

TEST_CASE("gateaux: zero perturbation gives exactly zero") {
  const auto oracle = data::oracle_of(data::named_dgp("confound-hetero", 3, 0.5, 3));
  const NuisancePerturbation zero{"zero", constant(0.0), constant(0.0)};
  const std::vector<double> x{0.2, 0.1, -0.3};
  for (auto method : {GateauxMethod::analytic, GateauxMethod::finite_difference}) {
    const auto r = gateaux_derivative(oracle, zero, x, 10'000, method, 1);
    CHECK(r.estimate == 0.0);
  }
  CHECK(non_orthogonal_control(oracle, zero, x, 10'000, 1).estimate == 0.0);
}

TEST_CASE("gateaux: analytic closed form vanishes on every standard direction") {
  const auto oracle = data::oracle_of(data::named_dgp("confound-linear", 3, 0.5, 3));
  const std::vector<double> x{0.7, -0.4, 1.0};
  for (const auto& p : standard_perturbations(3))
    CHECK(gateaux_derivative(oracle, p, x, 0, GateauxMethod::analytic, 0).estimate == 0.0);
}

TEST_CASE("gateaux: finite differences within Monte-Carlo error and agree with analytic") {
  const auto oracle = data::oracle_of(data::named_dgp("confound-hetero", 3, 0.5, 5));
  const std::vector<double> x{-0.5, 0.8, 0.1};
  std::uint64_t seed = 100;
  for (const auto& p : standard_perturbations(3)) {
    const auto fd = gateaux_derivative(oracle, p, x, 100'000, GateauxMethod::finite_difference, ++seed);
    const auto an = gateaux_derivative(oracle, p, x, 100'000, GateauxMethod::analytic, seed);
    CHECK_MESSAGE(fd.within(3.0), p.label);
    CHECK(std::abs(fd.estimate - an.estimate) <= 3.0 * fd.mc_stderr);
  }
}

TEST_CASE("gateaux: tau step sensitivity sweep") {
  // psi is quadratic in tau, so the central difference has no truncation
  // bias; only rounding changes with the step.
  const auto oracle = data::oracle_of(data::named_dgp("confound-hetero", 3, 0.5, 5));
  const std::vector<double> x{0.4, 0.4, -0.9};
  const auto p = standard_perturbations(3)[3];
  const auto ref = gateaux_derivative(oracle, p, x, 50'000, GateauxMethod::finite_difference, 9, 1e-4);
  for (double step : {1e-1, 1e-2, 1e-3, 1e-5, 1e-6}) {
    const auto r = gateaux_derivative(oracle, p, x, 50'000, GateauxMethod::finite_difference, 9, step);
    CHECK(r.within(3.0));
    CHECK(r.estimate == doctest::Approx(ref.estimate).epsilon(1e-6).scale(ref.mc_stderr));
  }
}

TEST_CASE("gateaux: invalid perturbations and sample counts are rejected") {
  const auto oracle = constant_oracle(0.0, 1.0, 0.5);
  const NuisancePerturbation too_far{"e+0.6", constant(0.0), constant(0.6)};
  CHECK_THROWS_AS(gateaux_derivative(oracle, too_far, kOrigin, 10'000,
                                     GateauxMethod::analytic, 0),
                  InvalidPerturbation);
  const NuisancePerturbation edge{"e-0.4995", constant(0.0), constant(-0.4995)};
  CHECK_THROWS_AS(validate_perturbation(oracle, edge, kOrigin), InvalidPerturbation);
  CHECK_THROWS_AS(gateaux_derivative(oracle, standard_perturbations(3)[0], kOrigin, 9'999,
                                     GateauxMethod::finite_difference, 0),
                  ConfigError);
}

TEST_CASE("non-orthogonal control detects a constant g shift") {
  // d/dtau E[(Y - g0 - tau c - theta T) T | x] = -c e0(x).
  const auto oracle = constant_oracle(0.3, 1.5, 0.5, 0.5);
  const auto r = non_orthogonal_control(oracle, constant_g_shift(1.0), kOrigin, 100'000, 4);
  CHECK(std::abs(r.estimate - (-0.5)) <= 3.0 * r.mc_stderr);
  CHECK_FALSE(r.within(3.0));

  const auto dgp = data::oracle_of(data::named_dgp("confound-linear", 3, 0.5, 2));
  const std::vector<double> x{0.5, 0.5, 0.5};
  for (double c : {0.5, -0.5, 2.0}) {
    const auto s = non_orthogonal_control(dgp, constant_g_shift(c), x, 100'000, 8);
    CHECK(std::abs(s.estimate + c * dgp.e0(x)) <= 3.0 * s.mc_stderr);
    CHECK_FALSE(s.within(3.0));
  }
}
