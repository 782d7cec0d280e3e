#include "cdnn/nn/training.hpp"

#include "cdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cdnn::nn {

Batch Batch::select(const std::vector<Eigen::Index>& columns) const {
  Batch b;
  b.x = x(Eigen::all, columns);
  b.t = t(columns);
  b.y = y(columns);
  return b;
}

MseResult mse_loss(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
  if (predictions.size() == 0 || targets.size() == 0)
    throw EmptyBatchError("mse_loss on an empty batch");
  if (predictions.size() != targets.size())
    throw InputShapeError("mse_loss: prediction and target lengths differ");
  const double n = static_cast<double>(predictions.size());
  const Eigen::VectorXd diff = predictions - targets;
  return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

ParameterSet loss_gradients(const Network& net, const Batch& batch, double* loss) {
  const ForwardCache cache = forward_batch(net, batch.x, batch.t);
  const MseResult mse = mse_loss(cache.output.transpose(), batch.y.transpose());
  if (loss) *loss = mse.loss;
  return backward_batch(net, cache, mse.gradient.transpose());
}

namespace {

double batch_loss(const Network& net, const Batch& batch) {
  const Eigen::RowVectorXd p = predict_batch(net, batch.x, batch.t);
  return (p - batch.y).squaredNorm() / static_cast<double>(batch.size());
}

double central_difference(Network& probe, const Batch& batch, double& param, double step) {
  const double saved = param;
  param = saved + step;
  const double up = batch_loss(probe, batch);
  param = saved - step;
  const double down = batch_loss(probe, batch);
  param = saved;
  return (up - down) / (2.0 * step);
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace

double gradient_check(const Network& net, const Batch& batch, double step, double floor) {
  if (batch.size() == 0) throw EmptyBatchError("gradient_check on an empty batch");
  const ParameterSet analytic = loss_gradients(net, batch);
  Network probe = net;
  ParameterSet& params = probe.mutable_parameters();
  double worst = 0.0;
  for (std::size_t l = 0; l < analytic.size(); ++l) {
    auto& w = params[l].weight;
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        worst = std::max(worst, relative_error(analytic[l].weight(r, c),
                                               central_difference(probe, batch, w(r, c), step),
                                               floor));
    auto& b = params[l].bias;
    for (Eigen::Index r = 0; r < b.size(); ++r)
      worst = std::max(worst, relative_error(analytic[l].bias(r),
                                             central_difference(probe, batch, b(r), step), floor));
  }
  return worst;
}

// ---------------------------------------------------------------------------

TrainingLog train(Network& net, const FreezeMask& mask, const Batch& train_set,
                  const Batch& validation, const TrainingConfig& cfg, std::mt19937_64& rng) {
  if (train_set.size() == 0) throw EmptyBatchError("training set is empty");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!mask.matches(net)) throw ContractViolation("freeze mask does not match the network");

  OptimizerState opt(cfg.optimizer, net);
  TrainingLog log;
  log.best_validation_mse = std::numeric_limits<double>::infinity();
  ParameterSet best = net.parameters();
  const bool use_validation = validation.size() > 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    opt.epoch = epoch;
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Batch mb = train_set.select(idx);
      double loss = 0.0;
      const ParameterSet grads = loss_gradients(net, mb, &loss);
      if (!std::isfinite(loss)) throw TrainingDivergence(epoch, "non-finite loss");
      step(net, grads, mask, opt);
      loss_sum += loss * static_cast<double>(stop - start);
    }
    log.train_mse.push_back(loss_sum / static_cast<double>(order.size()));

    if (!use_validation) continue;
    const double val = batch_loss(net, validation);
    if (!std::isfinite(val)) throw TrainingDivergence(epoch, "non-finite validation loss");
    log.validation_mse.push_back(val);
    if (val < log.best_validation_mse) {
      log.best_validation_mse = val;
      log.best_epoch = epoch;
      best = net.parameters();
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }

  if (use_validation) {
    net.mutable_parameters() = best;
  } else {
    log.best_epoch = log.train_mse.empty() ? 0 : log.train_mse.size() - 1;
    log.best_validation_mse = log.train_mse.empty() ? 0.0 : log.train_mse.back();
  }
  return log;
}

}  // namespace cdnn::nn
