#pragma once

#include "cdnn/data/dataset.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace cdnn::baselines {

inline constexpr double kRidgeFallback = 1e-8;

enum class FitScope { pooled, treated, control };

struct LinearModel {
  // Covariate slopes, plus the treatment slope last when fitted pooled with T.
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  FitScope fitted_on = FitScope::pooled;
  bool ridge_fallback = false;  // design was rank deficient

  // Uses the first d coefficients only (x part).
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

struct LeastSquares {
  Eigen::VectorXd beta;
  bool ridge_fallback = false;
};

// Minimizes ||X beta - y||. Rank-deficient designs are solved with a
// 1e-8 ridge instead and flagged.
LeastSquares least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y);

// Ridge with an unpenalized intercept; returns slopes and sets `intercept`.
Eigen::VectorXd ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      double& intercept);

struct Lr1Options {
  std::vector<std::size_t> drop_columns;  // covariates left out of the design
};

struct Lr1Result {
  LinearModel model;  // coefficients: d covariate slopes (0 when dropped), then T
  double effect = 0.0;

  Eigen::VectorXd ite(const Eigen::MatrixXd& x) const;  // constant
};

// Y on [1, x, T]. Needs both arms and n > d + 2.
Lr1Result ols_lr1(const data::Dataset& data, const Lr1Options& options = {});

struct Lr2Result {
  LinearModel treated;
  LinearModel control;

  Eigen::VectorXd ite(const Eigen::MatrixXd& x) const;
};

// Y on [1, x] within each arm. Each arm needs more than d + 2 samples.
Lr2Result ols_lr2(const data::Dataset& data);

}  // namespace cdnn::baselines
