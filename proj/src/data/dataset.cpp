#include "cdnn/data/dataset.hpp"

#include "cdnn/error.hpp"

#include <cmath>

namespace cdnn::data {

std::size_t Dataset::treated_count() const {
  return static_cast<std::size_t>((t.array() == 1.0).count());
}

bool Dataset::has_both_arms() const {
  const std::size_t treated = treated_count();
  return treated > 0 && treated < size();
}

std::span<const double> Dataset::row(std::size_t i, std::vector<double>& scratch) const {
  scratch.resize(covariate_width());
  for (std::size_t j = 0; j < scratch.size(); ++j)
    scratch[j] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return scratch;
}

Dataset Dataset::subset(std::span<const Eigen::Index> rows) const {
  const std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  Dataset out;
  out.x = x(idx, Eigen::all);
  out.t = t(idx);
  out.y = y(idx);
  if (truth) out.truth = GroundTruth{truth->y1(idx), truth->y0(idx), truth->theta(idx)};
  out.provenance = provenance;
  return out;
}

Dataset Dataset::with_swapped_arms() const {
  Dataset out = *this;
  out.t = (1.0 - t.array()).matrix();
  if (truth) out.truth = make_ground_truth(truth->y0, truth->y1);
  return out;
}

void Dataset::validate() const {
  const auto n = t.size();
  if (y.size() != n || x.rows() != n) throw SchemaError(0, "column lengths differ");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    if (t(i) != 0.0 && t(i) != 1.0) throw SchemaError(row, "treatment must be 0 or 1");
    if (!std::isfinite(y(i)) || !x.row(i).allFinite()) throw SchemaError(row, "non-finite value");
    if (!truth) continue;
    const auto& gt = *truth;
    if (!std::isfinite(gt.y1(i)) || !std::isfinite(gt.y0(i)))
      throw SchemaError(row, "non-finite potential outcome");
    if (y(i) != (t(i) == 1.0 ? gt.y1(i) : gt.y0(i)))
      throw SchemaError(row, "observed outcome differs from the potential outcome of its arm");
    if (gt.theta(i) != gt.y1(i) - gt.y0(i)) throw SchemaError(row, "theta != y1 - y0");
  }
}

bool Dataset::same_values(const Dataset& other) const {
  if (x.rows() != other.x.rows() || x.cols() != other.x.cols()) return false;
  if (x != other.x || t != other.t || y != other.y) return false;
  if (truth.has_value() != other.truth.has_value()) return false;
  if (!truth) return true;
  return truth->y1 == other.truth->y1 && truth->y0 == other.truth->y0 &&
         truth->theta == other.truth->theta;
}

GroundTruth make_ground_truth(Eigen::VectorXd y1, Eigen::VectorXd y0) {
  GroundTruth gt;
  gt.theta = y1 - y0;
  gt.y1 = std::move(y1);
  gt.y0 = std::move(y0);
  return gt;
}

}  // namespace cdnn::data
