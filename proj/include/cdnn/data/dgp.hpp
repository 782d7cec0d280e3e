#pragma once

#include "cdnn/data/dataset.hpp"
#include "cdnn/theory/oracle.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdnn::data {

enum class CovariateLaw {
  standard_normal,
  uniform,  // on [-sqrt(3), sqrt(3)]: zero mean, unit variance
};

struct PropensityForm {
  enum class Kind { constant, logistic_linear };
  Kind kind = Kind::constant;
  double probability = 0.5;     // constant
  std::vector<double> weights;  // logistic_linear
  double bias = 0.0;
};

// f(0, x) and theta0(x); f(1, x) = f(0, x) + theta0(x).
//
//   affine:         f0 = a + b.x               theta0 = c + g.x
//   quadratic:      f0 = a + b.x + sum q_j x_j^2, theta0 = c + g.x
//   sigmoid_hetero: f0 = a + b.x               theta0 = c + s * logistic(g.x)
struct OutcomeForm {
  enum class Kind { affine, quadratic, sigmoid_hetero };
  Kind kind = Kind::affine;
  double base_intercept = 0.0;
  std::vector<double> base_linear;
  std::vector<double> base_quadratic;
  double effect_intercept = 0.0;
  std::vector<double> effect_linear;
  double effect_scale = 1.0;
};

struct DgpSpec {
  std::string name = "custom";
  std::size_t d = 1;
  CovariateLaw covariate_law = CovariateLaw::standard_normal;
  PropensityForm propensity;
  OutcomeForm outcome;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  // Throws ConfigError on inconsistent lengths, negative noise or a
  // logistic propensity leaving (0.02, 0.98) on the radius-3 ball.
  void validate() const;

  double e0(std::span<const double> x) const;
  double f0(std::span<const double> x) const;
  double theta0(std::span<const double> x) const;
};

// Named desk-scale families. All use standard-normal covariates, logistic
// confounding through x0 and x1 and the affine baseline 1 + x0 + x1/2 - x2/2 + x3/4.
//   confound-linear  theta0 = 2
//   confound-hetero  theta0 = 1 + 2 x1
//   null-effect      theta0 = 0
DgpSpec named_dgp(std::string_view family, std::size_t d = 5, double noise_sigma = 0.5,
                  std::uint64_t seed = 0);
std::vector<std::string> named_dgp_families();

Dataset generate(const DgpSpec& spec, std::size_t n);

// Exact nuisances of `spec`; g0 is formed by the mixture identity.
theory::NuisanceOracle oracle_of(const DgpSpec& spec);

// Replication i is fully determined by (base, i): replication 0 is the base
// spec, later ones get a mixed seed and, optionally, redrawn baseline
// coefficients (the effect surface is left alone).
class ReplicationSet {
 public:
  ReplicationSet(DgpSpec base, std::size_t count, bool redraw_coefficients = false);

  std::size_t count() const { return count_; }
  const DgpSpec& base() const { return base_; }
  std::uint64_t seed(std::size_t index) const;
  DgpSpec spec(std::size_t index) const;

 private:
  DgpSpec base_;
  std::size_t count_;
  bool redraw_;
};

ReplicationSet make_replications(const DgpSpec& base, std::size_t count,
                                 bool redraw_coefficients = false);

// SplitMix64 finaliser; used to derive independent seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace cdnn::data
