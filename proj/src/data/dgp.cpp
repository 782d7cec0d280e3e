#include "cdnn/data/dgp.hpp"

#include "cdnn/error.hpp"

#include <cmath>
#include <random>
#include <set>

namespace cdnn::data {

namespace {

double dot(const std::vector<double>& w, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
  return s;
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_length(const std::vector<double>& v, std::size_t d, const char* what) {
  if (v.size() != d)
    throw ConfigError(std::string(what) + " has " + std::to_string(v.size()) +
                      " entries, expected d = " + std::to_string(d));
}

std::vector<double> padded(std::vector<double> v, std::size_t d) {
  v.resize(d, 0.0);
  return v;
}

}  // namespace

void DgpSpec::validate() const {
  if (d == 0) throw ConfigError("d must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ConfigError("noise_sigma must be finite and >= 0");

  if (propensity.kind == PropensityForm::Kind::constant) {
    if (!(propensity.probability > 0.0 && propensity.probability < 1.0))
      throw ConfigError("constant propensity must lie in (0, 1)");
  } else {
    require_length(propensity.weights, d, "propensity.weights");
    double norm2 = 0.0;
    for (double w : propensity.weights) norm2 += w * w;
    // Largest |logit| over the radius-3 ball must stay below logit(0.98).
    const double worst = 3.0 * std::sqrt(norm2) + std::abs(propensity.bias);
    if (!(worst < std::log(0.98 / 0.02)))
      throw ConfigError("logistic propensity violates overlap (0.02, 0.98) on the 3-sigma ball");
  }

  require_length(outcome.base_linear, d, "outcome.base_linear");
  require_length(outcome.effect_linear, d, "outcome.effect_linear");
  if (outcome.kind == OutcomeForm::Kind::quadratic)
    require_length(outcome.base_quadratic, d, "outcome.base_quadratic");
}

double DgpSpec::e0(std::span<const double> x) const {
  if (propensity.kind == PropensityForm::Kind::constant) return propensity.probability;
  return logistic(dot(propensity.weights, x) + propensity.bias);
}

double DgpSpec::f0(std::span<const double> x) const {
  double v = outcome.base_intercept + dot(outcome.base_linear, x);
  if (outcome.kind == OutcomeForm::Kind::quadratic)
    for (std::size_t j = 0; j < d; ++j) v += outcome.base_quadratic[j] * x[j] * x[j];
  return v;
}

double DgpSpec::theta0(std::span<const double> x) const {
  if (outcome.kind == OutcomeForm::Kind::sigmoid_hetero)
    return outcome.effect_intercept + outcome.effect_scale * logistic(dot(outcome.effect_linear, x));
  return outcome.effect_intercept + dot(outcome.effect_linear, x);
}

// ---------------------------------------------------------------------------

std::vector<std::string> named_dgp_families() {
  return {"confound-linear", "confound-hetero", "null-effect"};
}

DgpSpec named_dgp(std::string_view family, std::size_t d, double noise_sigma,
                  std::uint64_t seed) {
  if (d < 2) throw ConfigError("named DGP families need d >= 2");
  DgpSpec s;
  s.name = std::string(family);
  s.d = d;
  s.noise_sigma = noise_sigma;
  s.seed = seed;
  s.propensity.kind = PropensityForm::Kind::logistic_linear;
  s.propensity.weights = padded({0.8, -0.6}, d);
  s.outcome.kind = OutcomeForm::Kind::affine;
  s.outcome.base_intercept = 1.0;
  s.outcome.base_linear = padded({1.0, 0.5, -0.5, 0.25}, d);
  s.outcome.effect_linear = padded({}, d);

  if (family == "confound-linear") {
    s.outcome.effect_intercept = 2.0;
  } else if (family == "confound-hetero") {
    s.outcome.effect_intercept = 1.0;
    s.outcome.effect_linear[1] = 2.0;
  } else if (family == "null-effect") {
    s.outcome.effect_intercept = 0.0;
  } else {
    throw ConfigError("unknown DGP family '" + std::string(family) + "'");
  }
  s.validate();
  return s;
}

Dataset generate(const DgpSpec& spec, std::size_t n) {
  spec.validate();
  if (n == 0) throw ConfigError("generate: n must be >= 1");
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(spec.d);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double half_width = std::sqrt(3.0);
  std::uniform_real_distribution<double> uniform(-half_width, half_width);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset out;
  out.x.resize(rows, cols);
  out.t.resize(rows);
  out.y.resize(rows);
  Eigen::VectorXd y1(rows), y0(rows);
  std::vector<double> x(spec.d);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (auto& v : x)
      v = spec.covariate_law == CovariateLaw::standard_normal ? normal(rng) : uniform(rng);
    const bool treated = unit(rng) < spec.e0(x);
    const double base = spec.f0(x);
    const double effect = spec.theta0(x);
    y0(i) = base + spec.noise_sigma * normal(rng);
    y1(i) = base + effect + spec.noise_sigma * normal(rng);
    for (Eigen::Index j = 0; j < cols; ++j) out.x(i, j) = x[static_cast<std::size_t>(j)];
    out.t(i) = treated ? 1.0 : 0.0;
    out.y(i) = treated ? y1(i) : y0(i);
  }
  out.truth = make_ground_truth(std::move(y1), std::move(y0));
  out.provenance = spec.name + "#" + std::to_string(spec.seed);
  return out;
}

theory::NuisanceOracle oracle_of(const DgpSpec& spec) {
  spec.validate();
  return theory::NuisanceOracle::from_outcome_model(
      [spec](std::span<const double> x) { return spec.f0(x); },
      [spec](std::span<const double> x) { return spec.theta0(x); },
      [spec](std::span<const double> x) { return spec.e0(x); }, spec.noise_sigma);
}

// ---------------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ReplicationSet::ReplicationSet(DgpSpec base, std::size_t count, bool redraw_coefficients)
    : base_(std::move(base)), count_(count), redraw_(redraw_coefficients) {
  if (count_ == 0) throw ConfigError("replication count must be >= 1");
  base_.validate();
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < count_; ++i)
    if (!seen.insert(seed(i)).second) throw ConfigError("replication seeds collide");
}

std::uint64_t ReplicationSet::seed(std::size_t index) const {
  return index == 0 ? base_.seed : mix_seed(base_.seed, index);
}

DgpSpec ReplicationSet::spec(std::size_t index) const {
  if (index >= count_) throw ConfigError("replication index out of range");
  DgpSpec s = base_;
  s.seed = seed(index);
  if (redraw_ && index > 0) {
    // Baseline surface only. The effect surface defines the family and the
    // propensity keeps its validated overlap.
    std::mt19937_64 rng(mix_seed(s.seed, 0xC0EF));
    std::normal_distribution<double> jitter(0.0, 0.25);
    s.outcome.base_intercept += jitter(rng);
    for (auto& b : s.outcome.base_linear)
      if (b != 0.0) b += jitter(rng);
  }
  return s;
}

ReplicationSet make_replications(const DgpSpec& base, std::size_t count,
                                 bool redraw_coefficients) {
  return ReplicationSet(base, count, redraw_coefficients);
}

}  // namespace cdnn::data
