#pragma once

#include "cdnn/bench/run.hpp"

#include <filesystem>
#include <string>

namespace cdnn::bench {

enum class ReportFormat { csv, markdown };

// CSV columns: estimator,replication,status,sqrt_pehe,eps_ate,eps_ate_signed
//
// One row per (estimator, replication) with status ok or failed, then per
// estimator a "mean" and an "sd" row whose status is "n=<ok count>". An
// estimator with no ok replication gets a single "mean" row with status
// failed and nan metrics. Values use %.17g, so reloading is exact. Runtime is
// left out to keep the file bit-identical across runs.
std::string csv_report(const MetricsReport& report);

// Estimator x metric table with "mean±sd" cells, ok/failed counts and mean fit time.
std::string markdown_report(const MetricsReport& report);

// Throws IoError when the file cannot be written.
void emit(const MetricsReport& report, ReportFormat format, const std::filesystem::path& path);

// Per-replication rows and the aggregate rows as written. Throws SchemaError
// on malformed input.
struct CsvReport {
  std::vector<std::string> estimators;
  std::vector<ReplicationRow> rows;
  std::vector<AggregateRow> aggregates;
};
CsvReport read_csv_report(const std::string& text);
CsvReport load_csv_report(const std::filesystem::path& path);

}  // namespace cdnn::bench
