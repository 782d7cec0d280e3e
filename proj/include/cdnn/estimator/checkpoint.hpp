#pragma once

#include "cdnn/estimator/cdnn.hpp"

#include <json.hpp>

#include <filesystem>

namespace cdnn::est {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json to_json(const nn::Network& net);
nn::Network network_from_json(const nlohmann::json& j);

nlohmann::json to_json(const nn::FreezeMask& mask);
nn::FreezeMask mask_from_json(const nlohmann::json& j, const nn::Network& net);

// Flat snake_case object. Missing keys keep their defaults; unknown keys and
// ill-typed values raise ConfigError.
nlohmann::json to_json(const CdnnConfig& config);
CdnnConfig cdnn_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CdnnEstimator& est);
CdnnEstimator estimator_from_json(const nlohmann::json& j);

// Parameters are stored as shortest round-trip decimals, so a reload is
// bitwise identical. Throws IoError on unreadable or malformed files.
void save_checkpoint(const CdnnEstimator& est, const std::filesystem::path& path);
CdnnEstimator load_checkpoint(const std::filesystem::path& path);

}  // namespace cdnn::est
