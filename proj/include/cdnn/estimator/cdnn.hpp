#pragma once

#include "cdnn/data/dataset.hpp"
#include "cdnn/nn/network.hpp"
#include "cdnn/nn/training.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cdnn::est {

enum class Variant { explicit_residual, freezing };
enum class TargetKind { residual, outcome };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);
std::string to_string(TargetKind k);
TargetKind target_kind_from_string(const std::string& name);

struct CdnnConfig {
  // covariate_width is taken from the data at fit time.
  nn::Architecture architecture;
  // Adam at 3e-4: the freezing stage 2 is a warm-started fine-tune and
  // larger steps wash out what stage 1 learned.
  nn::TrainingConfig training{.optimizer = {.learning_rate = 3e-4}};
  std::size_t ensemble_size = 3;
  // Share of the pooled training data held out for early stopping in each member.
  double validation_fraction = 0.3;
  // Stage-2 treatment edges start uniform in +-treatment_init_scale.
  double treatment_init_scale = 1e-2;
  // Freezing variant: number of leading layers whose covariate weights and
  // biases are frozen. 1 freezes only W and its bias.
  std::size_t freeze_depth = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Stage1Model {
  nn::Network network;
  nn::TrainingLog log;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;  // x is n x d
};

struct ResidualDataset {
  data::Dataset base;
  Eigen::VectorXd residuals;  // y - g(x)
};

struct Stage2Model {
  Variant variant = Variant::freezing;
  TargetKind target = TargetKind::outcome;
  nn::Network network;
  nn::FreezeMask frozen_mask;
  nn::TrainingLog log;

  // h(1, x) - h(0, x) per row of x.
  Eigen::VectorXd ite(const Eigen::MatrixXd& x) const;
};

struct EnsembleMember {
  Stage1Model stage1;
  Stage2Model stage2;
};

struct CdnnEstimator {
  Variant variant = Variant::freezing;
  CdnnConfig config;
  std::vector<EnsembleMember> members;
};

// Mask freezing every weight that reads the treatment input.
nn::FreezeMask treatment_edge_mask(const nn::Network& net);
// True when every treatment-input weight is exactly zero.
bool treatment_edges_zero(const nn::Network& net);

// Fits g(x) = E[Y | x] with treatment edges held at zero. `validation` may be
// empty, in which case no early stopping happens.
Stage1Model fit_stage1(const data::Dataset& train, const data::Dataset& validation,
                       const CdnnConfig& config, std::mt19937_64& rng);

ResidualDataset compute_residuals(const Stage1Model& model, const data::Dataset& data);

// Fresh network regressing the residual on (x, T).
Stage2Model fit_stage2_explicit(const ResidualDataset& train, const ResidualDataset& validation,
                                const CdnnConfig& config, std::mt19937_64& rng);

// Stage-1 network reused; W (and the bias of the frozen layers) fixed, target Y.
Stage2Model fit_stage2_freezing(const Stage1Model& stage1, const data::Dataset& train,
                                const data::Dataset& validation, const CdnnConfig& config,
                                std::mt19937_64& rng);

// Trains `ensemble_size` members on distinct train/validation re-splits of `data`.
// Stage errors are rethrown with the member index prefixed to the message.
CdnnEstimator fit(const data::Dataset& data, Variant variant, const CdnnConfig& config);

// Averaged member ITEs per row of x (n x d).
Eigen::VectorXd predict_ite(const CdnnEstimator& est, const Eigen::MatrixXd& x);
double predict_ite(const CdnnEstimator& est, std::span<const double> x);

}  // namespace cdnn::est
