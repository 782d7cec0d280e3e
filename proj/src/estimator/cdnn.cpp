#include "cdnn/estimator/cdnn.hpp"

#include "cdnn/data/dgp.hpp"
#include "cdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

namespace cdnn::est {

std::string to_string(Variant v) {
  return v == Variant::freezing ? "freezing" : "explicit_residual";
}

Variant variant_from_string(const std::string& name) {
  if (name == "freezing") return Variant::freezing;
  if (name == "explicit_residual") return Variant::explicit_residual;
  throw ConfigError("unknown variant '" + name + "'");
}

std::string to_string(TargetKind k) { return k == TargetKind::outcome ? "outcome" : "residual"; }

TargetKind target_kind_from_string(const std::string& name) {
  if (name == "outcome") return TargetKind::outcome;
  if (name == "residual") return TargetKind::residual;
  throw ConfigError("unknown target kind '" + name + "'");
}

void CdnnConfig::validate() const {
  if (architecture.hidden_widths.empty()) throw ConfigError("need at least one hidden layer");
  for (auto w : architecture.hidden_widths)
    if (w == 0) throw ConfigError("hidden widths must be >= 1");
  if (ensemble_size == 0) throw ConfigError("ensemble_size must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ConfigError("validation_fraction must lie in [0, 1)");
  if (!(treatment_init_scale >= 0.0) || !std::isfinite(treatment_init_scale))
    throw ConfigError("treatment_init_scale must be finite and >= 0");
  if (freeze_depth == 0 || freeze_depth > architecture.hidden_widths.size())
    throw ConfigError("freeze_depth must lie in [1, number of hidden layers]");
  if (training.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(training.optimizer.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
}

namespace {

nn::Batch to_batch(const data::Dataset& d, const Eigen::VectorXd& target) {
  nn::Batch b;
  b.x = d.x.transpose();
  b.t = d.t.transpose();
  b.y = target.transpose();
  return b;
}

nn::Architecture architecture_for(const CdnnConfig& config, std::size_t d) {
  nn::Architecture arch = config.architecture;
  arch.covariate_width = d;
  return arch;
}

void set_treatment_edges(nn::Network& net, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  auto& params = net.mutable_parameters();
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto col = net.treatment_column(l);
    if (!col) continue;
    for (Eigen::Index r = 0; r < params[l].weight.rows(); ++r)
      params[l].weight(r, *col) = scale == 0.0 ? 0.0 : u(rng);
  }
}

void require_both_arms(const data::Dataset& d, const char* stage) {
  if (!d.has_both_arms())
    throw DegenerateTreatmentError(std::string(stage) + " needs both treatment arms in the training data");
}

}  // namespace

nn::FreezeMask treatment_edge_mask(const nn::Network& net) {
  nn::FreezeMask mask = nn::FreezeMask::none(net);
  for (std::size_t l = 0; l < mask.layers().size(); ++l)
    if (const auto col = net.treatment_column(l)) mask.layers()[l].weight.col(*col).setConstant(true);
  return mask;
}

bool treatment_edges_zero(const nn::Network& net) {
  const auto& params = net.parameters();
  for (std::size_t l = 0; l < params.size(); ++l)
    if (const auto col = net.treatment_column(l))
      if ((params[l].weight.col(*col).array() != 0.0).any()) return false;
  return true;
}

Eigen::VectorXd Stage1Model::predict(const Eigen::MatrixXd& x) const {
  const Eigen::RowVectorXd zeros = Eigen::RowVectorXd::Zero(x.rows());
  return nn::predict_batch(network, x.transpose(), zeros).transpose();
}

Eigen::VectorXd Stage2Model::ite(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd xt = x.transpose();
  const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(x.rows());
  const Eigen::RowVectorXd zeros = Eigen::RowVectorXd::Zero(x.rows());
  return (nn::predict_batch(network, xt, ones) - nn::predict_batch(network, xt, zeros)).transpose();
}

Stage1Model fit_stage1(const data::Dataset& train, const data::Dataset& validation,
                       const CdnnConfig& config, std::mt19937_64& rng) {
  config.validate();
  if (train.size() < 2) throw EmptyBatchError("stage 1 needs at least 2 samples");
  Stage1Model model{nn::Network(architecture_for(config, train.covariate_width())), {}};
  nn::glorot_initialize(model.network, rng);
  set_treatment_edges(model.network, 0.0, rng);
  const nn::FreezeMask mask = treatment_edge_mask(model.network);

  const nn::Batch tr = to_batch(train, train.y);
  const nn::Batch va = validation.size() ? to_batch(validation, validation.y) : nn::Batch{};
  model.log = nn::train(model.network, mask, tr, va, config.training, rng);
  if (!treatment_edges_zero(model.network))
    throw ContractViolation("stage 1 treatment edges moved away from zero");
  return model;
}

ResidualDataset compute_residuals(const Stage1Model& model, const data::Dataset& data) {
  if (data.covariate_width() != model.network.covariate_width())
    throw InputShapeError("residuals: data has " + std::to_string(data.covariate_width()) +
                          " covariates, model expects " +
                          std::to_string(model.network.covariate_width()));
  ResidualDataset r{data, data.y - model.predict(data.x)};
  if (!r.residuals.allFinite()) throw TrainingDivergence(0, "non-finite stage 1 residuals");
  return r;
}

Stage2Model fit_stage2_explicit(const ResidualDataset& train, const ResidualDataset& validation,
                                const CdnnConfig& config, std::mt19937_64& rng) {
  config.validate();
  require_both_arms(train.base, "explicit-residual stage 2");
  Stage2Model model{Variant::explicit_residual, TargetKind::residual,
                    nn::Network(architecture_for(config, train.base.covariate_width())), {}, {}};
  nn::glorot_initialize(model.network, rng);
  set_treatment_edges(model.network, config.treatment_init_scale, rng);
  model.frozen_mask = nn::FreezeMask::none(model.network);

  const nn::Batch tr = to_batch(train.base, train.residuals);
  const nn::Batch va =
      validation.base.size() ? to_batch(validation.base, validation.residuals) : nn::Batch{};
  model.log = nn::train(model.network, model.frozen_mask, tr, va, config.training, rng);
  return model;
}

Stage2Model fit_stage2_freezing(const Stage1Model& stage1, const data::Dataset& train,
                                const data::Dataset& validation, const CdnnConfig& config,
                                std::mt19937_64& rng) {
  config.validate();
  if (stage1.network.architecture() != architecture_for(config, train.covariate_width()))
    throw ConfigError("stage 1 architecture does not match the stage 2 configuration");
  require_both_arms(train, "freezing stage 2");

  Stage2Model model{Variant::freezing, TargetKind::outcome, stage1.network, {}, {}};
  set_treatment_edges(model.network, config.treatment_init_scale, rng);
  model.frozen_mask = nn::FreezeMask::none(model.network);
  for (std::size_t l = 0; l < config.freeze_depth; ++l) {
    auto& m = model.frozen_mask.layers()[l];
    m.weight.setConstant(true);
    m.bias.setConstant(true);
    if (const auto col = model.network.treatment_column(l)) m.weight.col(*col).setConstant(false);
  }

  const nn::Batch tr = to_batch(train, train.y);
  const nn::Batch va = validation.size() ? to_batch(validation, validation.y) : nn::Batch{};
  model.log = nn::train(model.network, model.frozen_mask, tr, va, config.training, rng);
  return model;
}

namespace {

[[noreturn]] void rethrow_for_member(std::size_t member) {
  const std::string prefix = "ensemble member " + std::to_string(member) + ": ";
  try {
    throw;
  } catch (const TrainingDivergence& e) {
    throw TrainingDivergence(e.epoch(), prefix + e.reason());
  } catch (const DegenerateTreatmentError& e) {
    throw DegenerateTreatmentError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const EmptyBatchError& e) {
    throw EmptyBatchError(prefix + e.what());
  } catch (const SplitError& e) {
    throw SplitError(prefix + e.what());
  }
}

EnsembleMember fit_member(const data::Dataset& data, Variant variant, const CdnnConfig& config,
                          std::size_t member) {
  const std::uint64_t seed = data::mix_seed(config.seed, member);
  std::vector<Eigen::Index> order(data.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 split_rng(seed);
  std::shuffle(order.begin(), order.end(), split_rng);

  const auto n_val = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(data.size())));
  if (data.size() - n_val < 2) throw SplitError("too few samples left for training");
  std::vector<Eigen::Index> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<Eigen::Index> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());
  const data::Dataset train = data.subset(train_rows);
  const data::Dataset validation = data.subset(val_rows);

  std::mt19937_64 rng(data::mix_seed(seed, 1));
  Stage1Model stage1 = fit_stage1(train, validation, config, rng);
  Stage2Model stage2 =
      variant == Variant::freezing
          ? fit_stage2_freezing(stage1, train, validation, config, rng)
          : fit_stage2_explicit(compute_residuals(stage1, train),
                                compute_residuals(stage1, validation), config, rng);
  return {std::move(stage1), std::move(stage2)};
}

}  // namespace

CdnnEstimator fit(const data::Dataset& data, Variant variant, const CdnnConfig& config) {
  config.validate();
  require_both_arms(data, "CDNN");
  CdnnEstimator est{variant, config, {}};
  est.config.architecture.covariate_width = data.covariate_width();
  for (std::size_t k = 0; k < config.ensemble_size; ++k) {
    try {
      est.members.push_back(fit_member(data, variant, config, k));
    } catch (const Error&) {
      rethrow_for_member(k);
    }
  }
  return est;
}

Eigen::VectorXd predict_ite(const CdnnEstimator& est, const Eigen::MatrixXd& x) {
  if (est.members.empty()) throw ContractViolation("estimator has no members");
  const std::size_t d = est.members.front().stage2.network.covariate_width();
  if (static_cast<std::size_t>(x.cols()) != d)
    throw InputShapeError("expected " + std::to_string(d) + " covariates, got " +
                          std::to_string(x.cols()));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.rows());
  for (const auto& m : est.members) sum += m.stage2.ite(x);
  return sum / static_cast<double>(est.members.size());
}

double predict_ite(const CdnnEstimator& est, std::span<const double> x) {
  const Eigen::Map<const Eigen::RowVectorXd> row(x.data(), static_cast<Eigen::Index>(x.size()));
  return predict_ite(est, Eigen::MatrixXd(row))(0);
}

}  // namespace cdnn::est
