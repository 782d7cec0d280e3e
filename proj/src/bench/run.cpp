#include "cdnn/bench/run.hpp"

#include "cdnn/baselines/dml.hpp"
#include "cdnn/baselines/linear.hpp"
#include "cdnn/data/csv.hpp"
#include "cdnn/data/dgp.hpp"
#include "cdnn/error.hpp"
#include "cdnn/estimator/cdnn.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace cdnn::bench {

std::size_t MetricsReport::failure_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.ok; }));
}

const AggregateRow& MetricsReport::aggregate(const std::string& estimator) const {
  for (const auto& a : aggregates)
    if (a.estimator == estimator) return a;
  throw ConfigError("no estimator '" + estimator + "' in report");
}

std::vector<AggregateRow> aggregate(const std::vector<ReplicationRow>& rows,
                                    const std::vector<std::string>& estimators) {
  std::vector<AggregateRow> out;
  for (const auto& name : estimators) {
    AggregateRow a;
    a.estimator = name;
    std::vector<double> pehe, ate, signed_ate;
    double runtime = 0.0;
    for (const auto& r : rows) {
      if (r.estimator != name) continue;
      if (!r.ok) {
        ++a.failed_count;
        continue;
      }
      ++a.ok_count;
      pehe.push_back(r.sqrt_pehe);
      ate.push_back(r.eps_ate);
      signed_ate.push_back(r.eps_ate_signed);
      runtime += r.runtime_seconds;
    }
    a.sqrt_pehe = summarize(pehe);
    a.eps_ate = summarize(ate);
    a.eps_ate_signed = summarize(signed_ate);
    if (a.ok_count > 0) a.mean_runtime_seconds = runtime / static_cast<double>(a.ok_count);
    out.push_back(a);
  }
  return out;
}

ReplicationData replication_data(const ExperimentConfig& config, std::size_t r) {
  ReplicationData rep;
  if (config.dgp) {
    const data::ReplicationSet reps(*config.dgp, config.replications, config.redraw_coefficients);
    rep.spec = reps.spec(r);
    rep.data = data::generate(*rep.spec, config.n);
  } else {
    const auto files = config.csv_files();
    if (r >= files.size()) throw ConfigError("no CSV file for replication " + std::to_string(r));
    rep.data = data::load_csv(files[r]);
  }
  const std::uint64_t rep_seed = data::mix_seed(config.seed, r);
  rep.indices = data::split_indices(rep.data.size(), config.split, data::mix_seed(rep_seed, 0));
  rep.fit_seed = data::mix_seed(rep_seed, 1);

  std::vector<Eigen::Index> pool = rep.indices.train;
  pool.insert(pool.end(), rep.indices.validation.begin(), rep.indices.validation.end());
  std::sort(pool.begin(), pool.end());
  rep.pool = rep.data.subset(pool);
  rep.evaluate = config.metrics_on == MetricScope::all ? rep.data : rep.data.subset(rep.indices.test);
  return rep;
}

Eigen::VectorXd fit_and_predict(const EstimatorSpec& spec, const data::Dataset& pool,
                                const Eigen::MatrixXd& x, std::uint64_t seed) {
  switch (spec.kind) {
    case EstimatorKind::cdnn_freezing:
    case EstimatorKind::cdnn_explicit: {
      est::CdnnConfig cfg = spec.cdnn;
      // Both variants see the same seed, so they share splits and stage-1 fits.
      cfg.seed = data::mix_seed(seed, cfg.seed);
      const auto variant = spec.kind == EstimatorKind::cdnn_freezing ? est::Variant::freezing
                                                                     : est::Variant::explicit_residual;
      return est::predict_ite(est::fit(pool, variant, cfg), x);
    }
    case EstimatorKind::ols_lr1:
      return baselines::ols_lr1(pool, spec.lr1).ite(x);
    case EstimatorKind::ols_lr2:
      return baselines::ols_lr2(pool).ite(x);
    case EstimatorKind::dml: {
      baselines::DmlConfig cfg = spec.dml;
      cfg.seed = data::mix_seed(seed, cfg.seed);
      return Eigen::VectorXd::Constant(x.rows(), baselines::dml_ate(pool, cfg).ate);
    }
  }
  throw ConfigError("unknown estimator kind");
}

namespace {

Eigen::VectorXd oracle_effect(const data::DgpSpec& spec, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    out[i] = spec.theta0(row);
  }
  return out;
}

void run_replication(const ExperimentConfig& config, const RunOptions& options, std::size_t r,
                     ReplicationRow* rows) {
  const std::size_t count = config.estimators.size();
  for (std::size_t e = 0; e < count; ++e) {
    rows[e].estimator = config.estimators[e].label();
    rows[e].replication = r;
  }
  ReplicationData rep;
  try {
    rep = replication_data(config, r);
  } catch (const std::exception& ex) {
    for (std::size_t e = 0; e < count; ++e) rows[e].error = std::string("data: ") + ex.what();
    return;
  }
  for (std::size_t e = 0; e < count; ++e) {
    ReplicationRow& row = rows[e];
    const auto start = std::chrono::steady_clock::now();
    try {
      const Eigen::VectorXd ite = fit_and_predict(config.estimators[e], rep.pool, rep.evaluate.x, rep.fit_seed);
      row.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.sqrt_pehe = sqrt_pehe(ite, rep.evaluate);
      row.eps_ate_signed = eps_ate_signed(ite, rep.evaluate);
      row.eps_ate = std::abs(row.eps_ate_signed);
      if (!ite.allFinite()) throw TrainingDivergence(0, "non-finite ITE prediction");
      row.ok = true;
      if (options.keep_predictions) {
        row.ite = ite;
        if (rep.spec) row.theta0 = oracle_effect(*rep.spec, rep.evaluate.x);
      }
    } catch (const std::exception& ex) {
      row.ok = false;
      row.error = ex.what();
    }
  }
}

}  // namespace

MetricsReport run(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  MetricsReport report;
  for (const auto& e : config.estimators) report.estimators.push_back(e.label());

  const std::size_t count = config.estimators.size();
  report.rows.resize(config.replications * count);
  const std::size_t workers = std::min(effective_workers(config), config.replications);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < config.replications; r = next++)
      run_replication(config, options, r, report.rows.data() + r * count);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  report.aggregates = aggregate(report.rows, report.estimators);
  return report;
}

}  // namespace cdnn::bench
