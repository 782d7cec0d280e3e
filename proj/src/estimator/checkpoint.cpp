#include "cdnn/estimator/checkpoint.hpp"

#include "cdnn/error.hpp"

#include <fstream>

namespace cdnn::est {

using nlohmann::json;

namespace {

std::string to_string(nn::Activation a) { return a == nn::Activation::swish ? "swish" : "identity"; }

nn::Activation activation_from_string(const std::string& s) {
  if (s == "swish") return nn::Activation::swish;
  if (s == "identity") return nn::Activation::identity;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(nn::OptimizerKind k) {
  return k == nn::OptimizerKind::adaptive_moment ? "adaptive_moment" : "sgd_momentum";
}

nn::OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adaptive_moment") return nn::OptimizerKind::adaptive_moment;
  if (s == "sgd_momentum") return nn::OptimizerKind::sgd_momentum;
  throw ConfigError("unknown optimizer '" + s + "'");
}

template <typename Derived>
json row_major(const Eigen::DenseBase<Derived>& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw IoError("malformed checkpoint: " + what);
}

}  // namespace

json to_json(const nn::Network& net) {
  const auto& arch = net.architecture();
  json layers = json::array();
  for (const auto& p : net.parameters())
    layers.push_back({{"rows", p.weight.rows()},
                      {"cols", p.weight.cols()},
                      {"weight", row_major(p.weight)},
                      {"bias", row_major(p.bias)}});
  return {{"covariate_width", arch.covariate_width},
          {"hidden_widths", arch.hidden_widths},
          {"activation", to_string(arch.hidden_activation)},
          {"input_concat", arch.concat_to_all_layers},
          {"layers", layers}};
}

nn::Network network_from_json(const json& j) {
  nn::Architecture arch;
  arch.covariate_width = j.at("covariate_width").get<std::size_t>();
  arch.hidden_widths = j.at("hidden_widths").get<std::vector<std::size_t>>();
  arch.hidden_activation = activation_from_string(j.at("activation").get<std::string>());
  arch.concat_to_all_layers = j.at("input_concat").get<bool>();
  nn::Network net(arch);
  const json& layers = j.at("layers");
  auto& params = net.mutable_parameters();
  require(layers.size() == params.size(), "layer count");
  for (std::size_t l = 0; l < params.size(); ++l) {
    auto& w = params[l].weight;
    auto& b = params[l].bias;
    const json& lj = layers[l];
    require(lj.at("rows").get<Eigen::Index>() == w.rows() &&
                lj.at("cols").get<Eigen::Index>() == w.cols(),
            "shape of layer " + std::to_string(l));
    const auto wv = lj.at("weight").get<std::vector<double>>();
    const auto bv = lj.at("bias").get<std::vector<double>>();
    require(wv.size() == static_cast<std::size_t>(w.size()) &&
                bv.size() == static_cast<std::size_t>(b.size()),
            "parameter count of layer " + std::to_string(l));
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = wv[k++];
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = bv[static_cast<std::size_t>(r)];
  }
  return net;
}

json to_json(const nn::FreezeMask& mask) {
  json out = json::array();
  for (const auto& m : mask.layers())
    out.push_back({{"weight", row_major(m.weight.cast<int>())}, {"bias", row_major(m.bias.cast<int>())}});
  return out;
}

nn::FreezeMask mask_from_json(const json& j, const nn::Network& net) {
  nn::FreezeMask mask = nn::FreezeMask::none(net);
  require(j.size() == mask.layers().size(), "mask layer count");
  for (std::size_t l = 0; l < mask.layers().size(); ++l) {
    auto& m = mask.layers()[l];
    const auto wv = j[l].at("weight").get<std::vector<int>>();
    const auto bv = j[l].at("bias").get<std::vector<int>>();
    require(wv.size() == static_cast<std::size_t>(m.weight.size()) &&
                bv.size() == static_cast<std::size_t>(m.bias.size()),
            "mask shape of layer " + std::to_string(l));
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < m.weight.cols(); ++c) m.weight(r, c) = wv[k++] != 0;
    for (Eigen::Index r = 0; r < m.bias.size(); ++r) m.bias(r) = bv[static_cast<std::size_t>(r)] != 0;
  }
  return mask;
}

json to_json(const CdnnConfig& c) {
  return {{"hidden_widths", c.architecture.hidden_widths},
          {"activation", to_string(c.architecture.hidden_activation)},
          {"input_concat", c.architecture.concat_to_all_layers},
          {"epochs", c.training.epochs},
          {"batch_size", c.training.batch_size},
          {"patience", c.training.patience},
          {"optimizer", to_string(c.training.optimizer.kind)},
          {"learning_rate", c.training.optimizer.learning_rate},
          {"momentum", c.training.optimizer.momentum},
          {"beta1", c.training.optimizer.beta1},
          {"beta2", c.training.optimizer.beta2},
          {"epsilon", c.training.optimizer.epsilon},
          {"ensemble_size", c.ensemble_size},
          {"validation_fraction", c.validation_fraction},
          {"treatment_init_scale", c.treatment_init_scale},
          {"freeze_depth", c.freeze_depth},
          {"seed", c.seed}};
}

CdnnConfig cdnn_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("estimator settings must be a JSON object");
  CdnnConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "hidden_widths") c.architecture.hidden_widths = v.get<std::vector<std::size_t>>();
      else if (key == "activation") c.architecture.hidden_activation = activation_from_string(v.get<std::string>());
      else if (key == "input_concat") c.architecture.concat_to_all_layers = v.get<bool>();
      else if (key == "epochs") c.training.epochs = v.get<std::size_t>();
      else if (key == "batch_size") c.training.batch_size = v.get<std::size_t>();
      else if (key == "patience") c.training.patience = v.get<std::size_t>();
      else if (key == "optimizer") c.training.optimizer.kind = optimizer_from_string(v.get<std::string>());
      else if (key == "learning_rate") c.training.optimizer.learning_rate = v.get<double>();
      else if (key == "momentum") c.training.optimizer.momentum = v.get<double>();
      else if (key == "beta1") c.training.optimizer.beta1 = v.get<double>();
      else if (key == "beta2") c.training.optimizer.beta2 = v.get<double>();
      else if (key == "epsilon") c.training.optimizer.epsilon = v.get<double>();
      else if (key == "ensemble_size") c.ensemble_size = v.get<std::size_t>();
      else if (key == "validation_fraction") c.validation_fraction = v.get<double>();
      else if (key == "treatment_init_scale") c.treatment_init_scale = v.get<double>();
      else if (key == "freeze_depth") c.freeze_depth = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw ConfigError("unknown estimator setting '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad estimator setting: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const CdnnEstimator& est) {
  json members = json::array();
  for (const auto& m : est.members)
    members.push_back({{"stage1", {{"network", to_json(m.stage1.network)}}},
                       {"stage2",
                        {{"target", to_string(m.stage2.target)},
                         {"network", to_json(m.stage2.network)},
                         {"frozen_mask", to_json(m.stage2.frozen_mask)}}}});
  return {{"format", "cdnn-checkpoint"},
          {"version", kCheckpointVersion},
          {"variant", to_string(est.variant)},
          {"covariate_width", est.config.architecture.covariate_width},
          {"config", to_json(est.config)},
          {"members", members}};
}

CdnnEstimator estimator_from_json(const json& j) {
  try {
    require(j.at("format") == "cdnn-checkpoint", "format tag");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw IoError("unsupported checkpoint version " + j.at("version").dump());
    CdnnEstimator est;
    est.variant = variant_from_string(j.at("variant").get<std::string>());
    est.config = cdnn_config_from_json(j.at("config"));
    est.config.architecture.covariate_width = j.at("covariate_width").get<std::size_t>();
    for (const auto& mj : j.at("members")) {
      Stage1Model s1{network_from_json(mj.at("stage1").at("network")), {}};
      const json& s2j = mj.at("stage2");
      nn::Network net2 = network_from_json(s2j.at("network"));
      nn::FreezeMask mask = mask_from_json(s2j.at("frozen_mask"), net2);
      Stage2Model s2{est.variant, target_kind_from_string(s2j.at("target").get<std::string>()),
                     std::move(net2), std::move(mask), {}};
      est.members.push_back({std::move(s1), std::move(s2)});
    }
    require(!est.members.empty(), "no members");
    return est;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const CdnnEstimator& est, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(est).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

CdnnEstimator load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return estimator_from_json(j);
}

}  // namespace cdnn::est
