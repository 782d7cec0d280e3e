#include "cdnn/nn/optimizer.hpp"

#include "cdnn/error.hpp"

#include <cmath>

namespace cdnn::nn {

OptimizerState::OptimizerState(OptimizerConfig cfg, const Network& net)
    : config(cfg), first_moment(zeros_like(net)), second_moment(zeros_like(net)) {
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

namespace {

template <typename Param, typename Mask>
void update_block(Param& param, const Param& grad, const Mask& frozen, Param& m, Param& v,
                  const OptimizerConfig& cfg, double bias1, double bias2) {
  if (cfg.kind == OptimizerKind::sgd_momentum) {
    m = frozen.select(m, (cfg.momentum * m + grad).eval());
    param = frozen.select(param, (param - cfg.learning_rate * m).eval());
    return;
  }
  m = frozen.select(m, (cfg.beta1 * m + (1.0 - cfg.beta1) * grad).eval());
  v = frozen.select(v, (cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad)).eval());
  const auto m_hat = (m / bias1).array();
  const auto v_hat = (v / bias2).array();
  Param delta = (cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon)).matrix();
  param = frozen.select(param, (param - delta).eval());
}

}  // namespace

void step(Network& net, const ParameterSet& grads, const FreezeMask& mask, OptimizerState& opt) {
  if (grads.size() != net.parameters().size() || !mask.matches(net) ||
      opt.first_moment.size() != grads.size())
    throw ContractViolation("optimizer step: gradient, mask and parameter shapes disagree");
  for (std::size_t l = 0; l < grads.size(); ++l) {
    if (grads[l].weight.rows() != net.parameters()[l].weight.rows() ||
        grads[l].weight.cols() != net.parameters()[l].weight.cols())
      throw ContractViolation("optimizer step: gradient shape mismatch in layer " +
                              std::to_string(l));
  }
  if (!all_finite(grads)) throw TrainingDivergence(opt.epoch, "non-finite gradient");

  ++opt.steps;
  const double t = static_cast<double>(opt.steps);
  const double bias1 = 1.0 - std::pow(opt.config.beta1, t);
  const double bias2 = 1.0 - std::pow(opt.config.beta2, t);

  auto& params = net.mutable_parameters();
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto& lm = mask.layers()[l];
    update_block(params[l].weight, grads[l].weight, lm.weight, opt.first_moment[l].weight,
                 opt.second_moment[l].weight, opt.config, bias1, bias2);
    update_block(params[l].bias, grads[l].bias, lm.bias, opt.first_moment[l].bias,
                 opt.second_moment[l].bias, opt.config, bias1, bias2);
  }
}

}  // namespace cdnn::nn
