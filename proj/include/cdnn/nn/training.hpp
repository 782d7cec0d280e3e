#pragma once

#include "cdnn/nn/network.hpp"
#include "cdnn/nn/optimizer.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <random>
#include <vector>

namespace cdnn::nn {

// A regression batch; samples are columns of x.
struct Batch {
  Eigen::MatrixXd x;       // covariate_width x n
  Eigen::RowVectorXd t;    // n
  Eigen::RowVectorXd y;    // n

  Eigen::Index size() const { return t.size(); }
  Batch select(const std::vector<Eigen::Index>& columns) const;
};

struct MseResult {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // d loss / d prediction
};

// loss = mean((p - y)^2), gradient = 2 (p - y) / N.
MseResult mse_loss(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets);

// Loss gradients w.r.t. every parameter for the batch mean squared error.
ParameterSet loss_gradients(const Network& net, const Batch& batch, double* loss = nullptr);

// Worst relative error |analytic - numeric| / max(|analytic|, |numeric|, floor)
// between backprop and central differences, over every parameter, frozen or not.
double gradient_check(const Network& net, const Batch& batch, double step = 1e-5,
                      double floor = 1e-7);

struct TrainingConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  std::size_t patience = 25;  // 0 disables early stopping
  OptimizerConfig optimizer;
};

struct TrainingLog {
  std::vector<double> train_mse;
  std::vector<double> validation_mse;
  std::size_t best_epoch = 0;
  double best_validation_mse = 0.0;
};

// Minibatch training on mean squared error. When `validation` is non-empty the
// parameters with the lowest validation MSE are restored at the end.
TrainingLog train(Network& net, const FreezeMask& mask, const Batch& train_set,
                  const Batch& validation, const TrainingConfig& cfg, std::mt19937_64& rng);

}  // namespace cdnn::nn
