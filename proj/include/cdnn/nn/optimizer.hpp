#pragma once

#include "cdnn/nn/network.hpp"

#include <cstddef>

namespace cdnn::nn {

enum class OptimizerKind { sgd_momentum, adaptive_moment };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adaptive_moment;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // sgd_momentum only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter accumulators. For sgd_momentum `first_moment` holds the
// velocity and `second_moment` stays zero. Frozen entries are never touched,
// so they remain zero.
struct OptimizerState {
  OptimizerState(OptimizerConfig cfg, const Network& net);

  OptimizerConfig config;
  std::size_t steps = 0;
  std::size_t epoch = 0;  // reported by TrainingDivergence
  ParameterSet first_moment;
  ParameterSet second_moment;
};

// Applies one update. Throws TrainingDivergence if any gradient is non-finite
// and ContractViolation if shapes disagree.
void step(Network& net, const ParameterSet& grads, const FreezeMask& mask, OptimizerState& opt);

}  // namespace cdnn::nn
