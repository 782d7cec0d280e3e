#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace cdnn::nn {

enum class Activation { swish, identity };

double logistic(double z);

// z * logistic(z). Saturates cleanly for large |z|.
double swish(double z);

// d/dz [z * logistic(z)] = s * (1 + z * (1 - s)), s = logistic(z).
double swish_derivative(double z);

double activate(Activation a, double z);
double activation_derivative(Activation a, double z);

struct LayerSpec {
  std::size_t input_width = 1;
  std::size_t output_width = 1;
  Activation activation = Activation::identity;
};

// Shape of a scalar-output regression network taking (x, t).
//
// Layer 0 always sees the raw input [x; t]. With concat_to_all_layers every
// later layer sees [h_prev; x; t] (the inputConcat wiring), otherwise only
// h_prev. The output layer is a single identity unit.
struct Architecture {
  std::size_t covariate_width = 1;
  std::vector<std::size_t> hidden_widths{64, 64, 64};
  Activation hidden_activation = Activation::swish;
  bool concat_to_all_layers = false;

  bool operator==(const Architecture&) const = default;
};

struct LayerParams {
  Eigen::MatrixXd weight;  // output_width x input_width
  Eigen::VectorXd bias;    // output_width
};

// Parameters and gradients share this shape.
using ParameterSet = std::vector<LayerParams>;

struct LayerMask {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> weight;
  Eigen::Array<bool, Eigen::Dynamic, 1> bias;
};

class Network;

// One bit per parameter; true means the parameter is frozen.
class FreezeMask {
 public:
  FreezeMask() = default;

  static FreezeMask none(const Network& net);
  static FreezeMask all(const Network& net);

  std::vector<LayerMask>& layers() { return layers_; }
  const std::vector<LayerMask>& layers() const { return layers_; }

  std::size_t frozen_count() const;
  bool matches(const Network& net) const;

 private:
  std::vector<LayerMask> layers_;
};

class Network {
 public:
  // All parameters start at zero.
  explicit Network(Architecture arch);

  const Architecture& architecture() const { return arch_; }
  std::span<const LayerSpec> layers() const { return layers_; }
  std::size_t covariate_width() const { return arch_.covariate_width; }
  std::size_t parameter_count() const;

  const ParameterSet& parameters() const { return params_; }
  // Any mutable access invalidates outstanding forward caches.
  ParameterSet& mutable_parameters() {
    ++version_;
    return params_;
  }
  std::uint64_t version() const { return version_; }

  bool sees_raw_input(std::size_t layer) const;
  // Column of t in the layer's weight matrix, when the layer sees the raw input.
  std::optional<Eigen::Index> treatment_column(std::size_t layer) const;
  // First column of the covariate block, when the layer sees the raw input.
  std::optional<Eigen::Index> covariate_offset(std::size_t layer) const;

 private:
  Architecture arch_;
  std::vector<LayerSpec> layers_;
  ParameterSet params_;
  std::uint64_t version_ = 0;
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)) for every weight, zero biases.
void glorot_initialize(Network& net, std::mt19937_64& rng);

// Per-layer inputs and pre-activations for a batch (samples are columns).
struct ForwardCache {
  std::uint64_t version = 0;
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre_activations;
  Eigen::RowVectorXd output;
};

// x is covariate_width x n, t has n entries.
ForwardCache forward_batch(const Network& net, const Eigen::MatrixXd& x,
                           const Eigen::RowVectorXd& t);
Eigen::RowVectorXd predict_batch(const Network& net, const Eigen::MatrixXd& x,
                                 const Eigen::RowVectorXd& t);

// Gradients of sum_j output_gradient[j] * output[j], summed over the batch.
ParameterSet backward_batch(const Network& net, const ForwardCache& cache,
                            const Eigen::RowVectorXd& output_gradient);

struct ForwardResult {
  double prediction = 0.0;
  ForwardCache cache;
};

ForwardResult forward(const Network& net, std::span<const double> x, double t);
double predict(const Network& net, std::span<const double> x, double t);
ParameterSet backward(const Network& net, const ForwardCache& cache, double loss_gradient);

ParameterSet zeros_like(const Network& net);
bool all_finite(const ParameterSet& params);

}  // namespace cdnn::nn
