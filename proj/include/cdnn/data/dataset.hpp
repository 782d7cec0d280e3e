#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cdnn::data {

// Potential outcomes for evaluation. theta = y1 - y0 elementwise.
struct GroundTruth {
  Eigen::VectorXd y1;
  Eigen::VectorXd y0;
  Eigen::VectorXd theta;
};

// Observational samples (x_i, t_i, y_i); rows of `x` are samples.
struct Dataset {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXd t;  // 0 / 1
  Eigen::VectorXd y;
  std::optional<GroundTruth> truth;
  std::string provenance;

  std::size_t size() const { return static_cast<std::size_t>(t.size()); }
  std::size_t covariate_width() const { return static_cast<std::size_t>(x.cols()); }
  std::size_t treated_count() const;
  bool has_both_arms() const;

  std::span<const double> row(std::size_t i, std::vector<double>& scratch) const;
  Dataset subset(std::span<const Eigen::Index> rows) const;
  Dataset with_swapped_arms() const;  // T -> 1 - T, y1 <-> y0

  // Throws SchemaError for non-binary t, non-finite values, or ground truth
  // violating y = t y1 + (1 - t) y0 and theta = y1 - y0.
  void validate() const;

  // Value equality on x, t, y and ground truth (provenance ignored).
  bool same_values(const Dataset& other) const;
};

// Sets theta = y1 - y0 and y from the arms.
GroundTruth make_ground_truth(Eigen::VectorXd y1, Eigen::VectorXd y0);

}  // namespace cdnn::data
