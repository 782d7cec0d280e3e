#pragma once

#include "cdnn/data/dataset.hpp"
#include "cdnn/estimator/cdnn.hpp"
#include "cdnn/theory/oracle.hpp"

#include <cstddef>
#include <cstdint>

namespace cdnn::baselines {

enum class NuisanceLearner { ridge, network, oracle };

struct DmlConfig {
  std::size_t folds = 2;
  bool crossfit = true;  // false fits and scores nuisances on all data
  NuisanceLearner learner = NuisanceLearner::ridge;
  double ridge_lambda = 1.0;
  est::CdnnConfig network;  // used when learner == network
  // Used when learner == oracle. Oracle propensities are not clamped.
  theory::ScalarField oracle_g;
  theory::ScalarField oracle_e;
  double clamp_low = 0.01;
  double clamp_high = 0.99;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DmlResult {
  double ate = 0.0;
  double std_error = 0.0;
  std::size_t clamped = 0;  // propensity estimates moved into [clamp_low, clamp_high]
  Eigen::VectorXd outcome_residual;    // Y - g_hat
  Eigen::VectorXd treatment_residual;  // T - e_hat
};

// Residual-on-residual estimate sum(v u) / sum(v^2) with v = T - e_hat and
// u = Y - g_hat, and its sandwich standard error. Throws OverlapError when
// sum(v^2) < 1e-8.
DmlResult dml_ate(const data::Dataset& data, const DmlConfig& config = {});

}  // namespace cdnn::baselines
