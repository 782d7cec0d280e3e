#include "cdnn/nn/network.hpp"

#include "cdnn/error.hpp"

#include <cmath>
#include <string>

namespace cdnn::nn {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double swish(double z) { return z * logistic(z); }

double swish_derivative(double z) {
  const double s = logistic(z);
  return s * (1.0 + z * (1.0 - s));
}

double activate(Activation a, double z) {
  return a == Activation::swish ? swish(z) : z;
}

double activation_derivative(Activation a, double z) {
  return a == Activation::swish ? swish_derivative(z) : 1.0;
}

// ---------------------------------------------------------------------------

FreezeMask FreezeMask::none(const Network& net) {
  FreezeMask m;
  for (const auto& p : net.parameters()) {
    LayerMask lm;
    lm.weight.setConstant(p.weight.rows(), p.weight.cols(), false);
    lm.bias.setConstant(p.bias.size(), false);
    m.layers_.push_back(std::move(lm));
  }
  return m;
}

FreezeMask FreezeMask::all(const Network& net) {
  FreezeMask m = none(net);
  for (auto& lm : m.layers_) {
    lm.weight.setConstant(true);
    lm.bias.setConstant(true);
  }
  return m;
}

std::size_t FreezeMask::frozen_count() const {
  std::size_t n = 0;
  for (const auto& lm : layers_) n += lm.weight.count() + lm.bias.count();
  return n;
}

bool FreezeMask::matches(const Network& net) const {
  const auto& params = net.parameters();
  if (params.size() != layers_.size()) return false;
  for (std::size_t l = 0; l < params.size(); ++l) {
    if (layers_[l].weight.rows() != params[l].weight.rows() ||
        layers_[l].weight.cols() != params[l].weight.cols() ||
        layers_[l].bias.size() != params[l].bias.size())
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Network::Network(Architecture arch) : arch_(std::move(arch)) {
  if (arch_.covariate_width == 0) throw ConfigError("covariate_width must be >= 1");
  for (auto w : arch_.hidden_widths)
    if (w == 0) throw ConfigError("hidden layer widths must be >= 1");

  const std::size_t raw = arch_.covariate_width + 1;
  std::size_t prev = raw;
  for (std::size_t l = 0; l <= arch_.hidden_widths.size(); ++l) {
    const bool is_output = l == arch_.hidden_widths.size();
    LayerSpec spec;
    spec.input_width = prev + ((l > 0 && arch_.concat_to_all_layers) ? raw : 0);
    spec.output_width = is_output ? 1 : arch_.hidden_widths[l];
    spec.activation = is_output ? Activation::identity : arch_.hidden_activation;
    layers_.push_back(spec);
    params_.push_back({Eigen::MatrixXd::Zero(spec.output_width, spec.input_width),
                       Eigen::VectorXd::Zero(spec.output_width)});
    prev = spec.output_width;
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& s : layers_) n += s.output_width * (s.input_width + 1);
  return n;
}

bool Network::sees_raw_input(std::size_t layer) const {
  return layer == 0 || (arch_.concat_to_all_layers && layer < layers_.size());
}

std::optional<Eigen::Index> Network::covariate_offset(std::size_t layer) const {
  if (!sees_raw_input(layer)) return std::nullopt;
  if (layer == 0) return 0;
  return static_cast<Eigen::Index>(layers_[layer - 1].output_width);
}

std::optional<Eigen::Index> Network::treatment_column(std::size_t layer) const {
  auto off = covariate_offset(layer);
  if (!off) return std::nullopt;
  return *off + static_cast<Eigen::Index>(arch_.covariate_width);
}

void glorot_initialize(Network& net, std::mt19937_64& rng) {
  auto& params = net.mutable_parameters();
  for (std::size_t l = 0; l < params.size(); ++l) {
    const auto& spec = net.layers()[l];
    const double limit =
        std::sqrt(6.0 / static_cast<double>(spec.input_width + spec.output_width));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto& w = params[l].weight;
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
    params[l].bias.setZero();
  }
}

// ---------------------------------------------------------------------------

namespace {

void check_input(const Network& net, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& t) {
  if (static_cast<std::size_t>(x.rows()) != net.covariate_width())
    throw InputShapeError("expected " + std::to_string(net.covariate_width()) +
                          " covariates, got " + std::to_string(x.rows()));
  if (x.cols() != t.size())
    throw InputShapeError("covariate and treatment batch sizes differ");
}

Eigen::MatrixXd layer_input(const Network& net, std::size_t l, const Eigen::MatrixXd& prev,
                            const Eigen::MatrixXd& x, const Eigen::RowVectorXd& t) {
  const Eigen::Index n = x.cols();
  const auto d = x.rows();
  if (l == 0) {
    Eigen::MatrixXd in(d + 1, n);
    in.topRows(d) = x;
    in.row(d) = t;
    return in;
  }
  if (!net.architecture().concat_to_all_layers) return prev;
  const auto h = prev.rows();
  Eigen::MatrixXd in(h + d + 1, n);
  in.topRows(h) = prev;
  in.middleRows(h, d) = x;
  in.row(h + d) = t;
  return in;
}

void apply_activation(Activation a, Eigen::MatrixXd& m) {
  if (a == Activation::identity) return;
  m = m.unaryExpr([a](double z) { return activate(a, z); });
}

}  // namespace

ForwardCache forward_batch(const Network& net, const Eigen::MatrixXd& x,
                           const Eigen::RowVectorXd& t) {
  check_input(net, x, t);
  ForwardCache cache;
  cache.version = net.version();
  const auto& params = net.parameters();
  Eigen::MatrixXd h;
  for (std::size_t l = 0; l < params.size(); ++l) {
    cache.inputs.push_back(layer_input(net, l, h, x, t));
    Eigen::MatrixXd z = params[l].weight * cache.inputs.back();
    z.colwise() += params[l].bias;
    cache.pre_activations.push_back(z);
    apply_activation(net.layers()[l].activation, z);
    h = std::move(z);
  }
  cache.output = h.row(0);
  return cache;
}

Eigen::RowVectorXd predict_batch(const Network& net, const Eigen::MatrixXd& x,
                                 const Eigen::RowVectorXd& t) {
  check_input(net, x, t);
  const auto& params = net.parameters();
  Eigen::MatrixXd h;
  for (std::size_t l = 0; l < params.size(); ++l) {
    Eigen::MatrixXd z = params[l].weight * layer_input(net, l, h, x, t);
    z.colwise() += params[l].bias;
    apply_activation(net.layers()[l].activation, z);
    h = std::move(z);
  }
  return h.row(0);
}

ParameterSet backward_batch(const Network& net, const ForwardCache& cache,
                            const Eigen::RowVectorXd& output_gradient) {
  if (cache.version != net.version() || cache.inputs.size() != net.layers().size())
    throw ContractViolation("forward cache is stale: parameters changed since forward");
  if (output_gradient.size() != cache.output.size())
    throw InputShapeError("output gradient length does not match the cached batch");

  const auto& params = net.parameters();
  ParameterSet grads(params.size());
  Eigen::MatrixXd delta = output_gradient;  // 1 x n, identity output
  for (std::size_t l = params.size(); l-- > 0;) {
    grads[l].weight = delta * cache.inputs[l].transpose();
    grads[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    const auto hidden = static_cast<Eigen::Index>(net.layers()[l - 1].output_width);
    Eigen::MatrixXd upstream = params[l].weight.leftCols(hidden).transpose() * delta;
    const Activation a = net.layers()[l - 1].activation;
    delta = upstream.cwiseProduct(cache.pre_activations[l - 1].unaryExpr(
        [a](double z) { return activation_derivative(a, z); }));
  }
  return grads;
}

ForwardResult forward(const Network& net, std::span<const double> x, double t) {
  if (x.size() != net.covariate_width())
    throw InputShapeError("expected " + std::to_string(net.covariate_width()) +
                          " covariates, got " + std::to_string(x.size()));
  Eigen::MatrixXd xm = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  Eigen::RowVectorXd tm(1);
  tm(0) = t;
  ForwardResult r;
  r.cache = forward_batch(net, xm, tm);
  r.prediction = r.cache.output(0);
  return r;
}

double predict(const Network& net, std::span<const double> x, double t) {
  if (x.size() != net.covariate_width())
    throw InputShapeError("expected " + std::to_string(net.covariate_width()) +
                          " covariates, got " + std::to_string(x.size()));
  Eigen::MatrixXd xm = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  Eigen::RowVectorXd tm(1);
  tm(0) = t;
  return predict_batch(net, xm, tm)(0);
}

ParameterSet backward(const Network& net, const ForwardCache& cache, double loss_gradient) {
  Eigen::RowVectorXd g(1);
  g(0) = loss_gradient;
  return backward_batch(net, cache, g);
}

ParameterSet zeros_like(const Network& net) {
  ParameterSet z;
  for (const auto& p : net.parameters())
    z.push_back({Eigen::MatrixXd::Zero(p.weight.rows(), p.weight.cols()),
                 Eigen::VectorXd::Zero(p.bias.size())});
  return z;
}

bool all_finite(const ParameterSet& params) {
  for (const auto& p : params)
    if (!p.weight.allFinite() || !p.bias.allFinite()) return false;
  return true;
}

}  // namespace cdnn::nn
