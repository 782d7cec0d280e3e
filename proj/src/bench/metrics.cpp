#include "cdnn/bench/metrics.hpp"

#include "cdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cdnn::bench {

namespace {

void check_lengths(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() == 0) throw EmptyBatchError("metric on empty vectors");
  if (pred.size() != truth.size())
    throw InputShapeError("prediction has " + std::to_string(pred.size()) + " entries, truth " +
                          std::to_string(truth.size()));
}

const Eigen::VectorXd& truth_of(const data::Dataset& data) {
  if (!data.truth) throw MetricUnavailable("dataset has no ground-truth potential outcomes");
  return data.truth->theta;
}

}  // namespace

double sqrt_pehe(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  check_lengths(pred, truth);
  return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

double eps_ate_signed(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  check_lengths(pred, truth);
  return pred.mean() - truth.mean();
}

double eps_ate(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  return std::abs(eps_ate_signed(pred, truth));
}

double sqrt_pehe(const Eigen::VectorXd& pred, const data::Dataset& data) {
  return sqrt_pehe(pred, truth_of(data));
}

double eps_ate_signed(const Eigen::VectorXd& pred, const data::Dataset& data) {
  return eps_ate_signed(pred, truth_of(data));
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

int decimals_for(double v) { return std::abs(v) >= 0.1 ? 2 : 3; }

}  // namespace

std::string format_value(double v) { return fixed(v, decimals_for(v)); }

std::string format_cell(const Summary& s) {
  const int decimals = std::max(decimals_for(s.mean), decimals_for(s.sd));
  return fixed(s.mean, decimals) + "±" + fixed(s.sd, decimals);
}

}  // namespace cdnn::bench
