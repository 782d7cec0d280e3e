#include "cdnn/baselines/dml.hpp"

#include "cdnn/baselines/linear.hpp"
#include "cdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cdnn::baselines {

void DmlConfig::validate() const {
  if (crossfit && folds < 2) throw ConfigError("cross-fitting needs at least 2 folds");
  if (!(ridge_lambda >= 0.0)) throw ConfigError("ridge_lambda must be >= 0");
  if (!(0.0 < clamp_low && clamp_low < clamp_high && clamp_high < 1.0))
    throw ConfigError("propensity clamp must satisfy 0 < low < high < 1");
  if (learner == NuisanceLearner::oracle && (!oracle_g || !oracle_e))
    throw ConfigError("oracle nuisances requested but not supplied");
  if (learner == NuisanceLearner::network) network.validate();
}

namespace {

struct Nuisances {
  Eigen::VectorXd g;
  Eigen::VectorXd e;
};

Nuisances fit_and_score(const data::Dataset& fit_on, const data::Dataset& score_on,
                        const DmlConfig& config, std::uint64_t seed) {
  Nuisances out;
  switch (config.learner) {
    case NuisanceLearner::ridge: {
      double bg = 0.0, be = 0.0;
      const Eigen::VectorXd wg = ridge(fit_on.x, fit_on.y, config.ridge_lambda, bg);
      const Eigen::VectorXd we = ridge(fit_on.x, fit_on.t, config.ridge_lambda, be);
      out.g = (score_on.x * wg).array() + bg;
      out.e = (score_on.x * we).array() + be;
      break;
    }
    case NuisanceLearner::network: {
      std::mt19937_64 rng(seed);
      out.g = est::fit_stage1(fit_on, {}, config.network, rng).predict(score_on.x);
      data::Dataset treat = fit_on;
      treat.y = fit_on.t;
      treat.truth.reset();
      out.e = est::fit_stage1(treat, {}, config.network, rng).predict(score_on.x);
      break;
    }
    case NuisanceLearner::oracle: {
      std::vector<double> row;
      out.g.resize(static_cast<Eigen::Index>(score_on.size()));
      out.e.resize(out.g.size());
      for (std::size_t i = 0; i < score_on.size(); ++i) {
        const auto x = score_on.row(i, row);
        out.g(static_cast<Eigen::Index>(i)) = config.oracle_g(x);
        out.e(static_cast<Eigen::Index>(i)) = config.oracle_e(x);
      }
      break;
    }
  }
  return out;
}

}  // namespace

DmlResult dml_ate(const data::Dataset& data, const DmlConfig& config) {
  config.validate();
  if (!data.has_both_arms()) throw DegenerateArmError("dml_ate needs both treatment arms");
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd g_hat(n), e_hat(n);

  if (!config.crossfit || config.learner == NuisanceLearner::oracle) {
    const Nuisances nu = fit_and_score(data, data, config, config.seed);
    g_hat = nu.g;
    e_hat = nu.e;
  } else {
    if (data.size() < 2 * config.folds) throw SplitError("too few samples for the requested folds");
    std::vector<Eigen::Index> order(data.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < config.folds; ++k) {
      std::vector<Eigen::Index> in, out;
      for (std::size_t i = 0; i < order.size(); ++i) (i % config.folds == k ? out : in).push_back(order[i]);
      std::sort(in.begin(), in.end());
      std::sort(out.begin(), out.end());
      const Nuisances nu = fit_and_score(data.subset(in), data.subset(out), config, config.seed + k + 1);
      for (std::size_t i = 0; i < out.size(); ++i) {
        g_hat(out[i]) = nu.g(static_cast<Eigen::Index>(i));
        e_hat(out[i]) = nu.e(static_cast<Eigen::Index>(i));
      }
    }
  }

  DmlResult r;
  if (config.learner != NuisanceLearner::oracle) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = std::clamp(e_hat(i), config.clamp_low, config.clamp_high);
      if (c != e_hat(i)) ++r.clamped;
      e_hat(i) = c;
    }
  }
  r.outcome_residual = data.y - g_hat;
  r.treatment_residual = data.t - e_hat;
  const double denom = r.treatment_residual.squaredNorm();
  if (!(denom >= 1e-8))
    throw OverlapError("treatment residual variance " + std::to_string(denom) + " is below 1e-8");
  r.ate = r.treatment_residual.dot(r.outcome_residual) / denom;

  const Eigen::ArrayXd v = r.treatment_residual.array();
  const Eigen::ArrayXd psi = (r.outcome_residual.array() - r.ate * v) * v;
  const double nd = static_cast<double>(n);
  const double j = denom / nd;
  r.std_error = std::sqrt(psi.square().mean() / (j * j) / nd);
  return r;
}

}  // namespace cdnn::baselines
