#pragma once

#include "cdnn/data/dataset.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>

namespace cdnn::bench {

// sqrt(mean((pred - truth)^2))
double sqrt_pehe(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);
// mean(pred) - mean(truth); eps_ate is its absolute value.
double eps_ate_signed(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);
double eps_ate(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

// Dataset overloads throw MetricUnavailable when ground truth is absent.
double sqrt_pehe(const Eigen::VectorXd& pred, const data::Dataset& data);
double eps_ate_signed(const Eigen::VectorXd& pred, const data::Dataset& data);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator, 0 for a single value
  std::size_t count = 0;
};

// Values are summed in order, so the result is reproducible bit for bit.
Summary summarize(std::span<const double> values);

// Two decimals when |v| >= 0.1, three otherwise.
std::string format_value(double v);
// "mean±sd" with one precision for the whole cell: three decimals when
// either number is below 0.1 ("0.319±0.008"), else two ("0.54±0.32").
std::string format_cell(const Summary& s);

}  // namespace cdnn::bench
