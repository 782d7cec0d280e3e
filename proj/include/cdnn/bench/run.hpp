#pragma once

#include "cdnn/bench/config.hpp"
#include "cdnn/bench/metrics.hpp"
#include "cdnn/data/dataset.hpp"
#include "cdnn/data/split.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cdnn::bench {

struct ReplicationRow {
  std::string estimator;
  std::size_t replication = 0;
  bool ok = false;
  double sqrt_pehe = 0.0;
  double eps_ate = 0.0;
  double eps_ate_signed = 0.0;
  double runtime_seconds = 0.0;  // fit + predict; not part of the CSV
  std::string error;

  // Filled only with RunOptions::keep_predictions.
  Eigen::VectorXd ite;
  Eigen::VectorXd theta0;  // oracle effect at the evaluation rows (generated data only)
};

struct AggregateRow {
  std::string estimator;
  std::size_t ok_count = 0;
  std::size_t failed_count = 0;
  Summary sqrt_pehe;
  Summary eps_ate;
  Summary eps_ate_signed;
  double mean_runtime_seconds = 0.0;

  bool all_failed() const { return ok_count == 0; }
};

struct MetricsReport {
  std::vector<std::string> estimators;  // report order
  std::vector<ReplicationRow> rows;     // estimator-major within each replication
  std::vector<AggregateRow> aggregates;

  std::size_t failure_count() const;
  const AggregateRow& aggregate(const std::string& estimator) const;
};

// Mean and sd over the ok rows of each estimator, in `estimators` order.
std::vector<AggregateRow> aggregate(const std::vector<ReplicationRow>& rows,
                                    const std::vector<std::string>& estimators);

struct ReplicationData {
  data::Dataset data;
  data::SplitIndices indices;
  data::Dataset pool;      // train + validation
  data::Dataset evaluate;  // test split, or all rows with MetricScope::all
  std::optional<data::DgpSpec> spec;
  std::uint64_t fit_seed = 0;
};

// Everything replication r depends on is derived from (config, r).
ReplicationData replication_data(const ExperimentConfig& config, std::size_t r);

// Fits on `pool` and returns the ITE at the rows of `x`. DML gives a constant.
Eigen::VectorXd fit_and_predict(const EstimatorSpec& spec, const data::Dataset& pool,
                                const Eigen::MatrixXd& x, std::uint64_t seed);

struct RunOptions {
  bool keep_predictions = false;
};

// Replications run on effective_workers(config) threads; the result is the
// same for any worker count.
MetricsReport run(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace cdnn::bench
