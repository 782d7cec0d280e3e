#pragma once

#include "cdnn/baselines/dml.hpp"
#include "cdnn/baselines/linear.hpp"
#include "cdnn/data/dgp.hpp"
#include "cdnn/data/split.hpp"
#include "cdnn/estimator/cdnn.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cdnn::bench {

enum class EstimatorKind { cdnn_freezing, cdnn_explicit, ols_lr1, ols_lr2, dml };

std::string to_string(EstimatorKind k);
EstimatorKind estimator_kind_from_string(const std::string& name);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::cdnn_freezing;
  std::string name;            // report label; defaults to the kind
  est::CdnnConfig cdnn;        // cdnn_* only
  baselines::Lr1Options lr1;   // ols_lr1 only
  baselines::DmlConfig dml;    // dml only; oracle learner is not available here

  std::string label() const { return name.empty() ? to_string(kind) : name; }
};

enum class MetricScope { test, all };

struct ExperimentConfig {
  std::optional<data::DgpSpec> dgp;
  std::string csv_glob;  // alternative to dgp; one replication per matched file
  std::size_t n = 1000;
  std::size_t replications = 10;
  bool redraw_coefficients = false;
  data::SplitSpec split = data::SplitSpec::ihdp();
  std::vector<EstimatorSpec> estimators;
  std::uint64_t seed = 0;
  std::string output;  // path prefix for <output>.csv and <output>.md
  std::size_t workers = 1;
  MetricScope metrics_on = MetricScope::test;

  // Throws ConfigError; resolves the CSV glob so missing files fail early.
  // Estimator labels must be unique.
  void validate() const;
  std::vector<std::filesystem::path> csv_files() const;
};

nlohmann::json to_json(const data::DgpSpec& spec);
data::DgpSpec dgp_from_json(const nlohmann::json& j);

// snake_case keys mirroring ExperimentConfig; unknown keys raise ConfigError.
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Worker count after the CDNN_WORKERS override, at least 1.
std::size_t effective_workers(const ExperimentConfig& config);

// Files in the glob's directory whose names match its last component
// ('*' and '?' wildcards), sorted.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

}  // namespace cdnn::bench
