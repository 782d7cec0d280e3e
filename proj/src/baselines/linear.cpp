#include "cdnn/baselines/linear.hpp"

#include "cdnn/error.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace cdnn::baselines {

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() > coefficients.size())
    throw InputShapeError("linear model has " + std::to_string(coefficients.size()) +
                          " coefficients, input has " + std::to_string(x.cols()) + " columns");
  return (x * coefficients.head(x.cols())).array() + intercept;
}

LeastSquares least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  if (design.rows() != y.size()) throw InputShapeError("design and target lengths differ");
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() == design.cols()) return {qr.solve(y), false};
  const Eigen::MatrixXd gram =
      design.transpose() * design +
      kRidgeFallback * Eigen::MatrixXd::Identity(design.cols(), design.cols());
  return {gram.ldlt().solve(design.transpose() * y), true};
}

Eigen::VectorXd ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      double& intercept) {
  if (x.rows() != y.size()) throw InputShapeError("design and target lengths differ");
  if (x.rows() == 0) throw EmptyBatchError("ridge on an empty design");
  const Eigen::RowVectorXd mean_x = x.colwise().mean();
  const double mean_y = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - mean_x;
  const Eigen::MatrixXd gram =
      xc.transpose() * xc + lambda * Eigen::MatrixXd::Identity(x.cols(), x.cols());
  const Eigen::VectorXd beta = gram.ldlt().solve(xc.transpose() * (y.array() - mean_y).matrix());
  intercept = mean_y - mean_x.dot(beta);
  return beta;
}

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x;
  return out;
}

LinearModel fit_arm(const data::Dataset& data, double arm, FitScope scope) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < data.t.size(); ++i)
    if (data.t(i) == arm) rows.push_back(i);
  const auto d = static_cast<std::size_t>(data.x.cols());
  if (rows.size() <= d + 2)
    throw DegenerateArmError(std::string(scope == FitScope::treated ? "treated" : "control") +
                             " arm has " + std::to_string(rows.size()) + " samples, needs more than " +
                             std::to_string(d + 2));
  const data::Dataset part = data.subset(rows);
  const LeastSquares ls = least_squares(with_intercept(part.x), part.y);
  return {ls.beta.tail(static_cast<Eigen::Index>(d)), ls.beta(0), scope, ls.ridge_fallback};
}

}  // namespace

Eigen::VectorXd Lr1Result::ite(const Eigen::MatrixXd& x) const {
  return Eigen::VectorXd::Constant(x.rows(), effect);
}

Lr1Result ols_lr1(const data::Dataset& data, const Lr1Options& options) {
  const auto d = static_cast<std::size_t>(data.x.cols());
  if (!data.has_both_arms()) throw DegenerateArmError("ols_lr1 needs both treatment arms");
  if (data.size() <= d + 2)
    throw DegenerateArmError("ols_lr1 needs more than " + std::to_string(d + 2) + " samples");

  std::vector<Eigen::Index> kept;
  for (std::size_t j = 0; j < d; ++j) {
    if (std::find(options.drop_columns.begin(), options.drop_columns.end(), j) != options.drop_columns.end())
      continue;
    kept.push_back(static_cast<Eigen::Index>(j));
  }
  for (auto j : options.drop_columns)
    if (j >= d) throw ConfigError("drop column " + std::to_string(j) + " out of range");

  const auto k = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd design(data.x.rows(), k + 2);
  design.col(0).setOnes();
  for (Eigen::Index c = 0; c < k; ++c) design.col(c + 1) = data.x.col(kept[static_cast<std::size_t>(c)]);
  design.col(k + 1) = data.t;
  const LeastSquares ls = least_squares(design, data.y);

  Lr1Result r;
  r.model.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d) + 1);
  for (Eigen::Index c = 0; c < k; ++c) r.model.coefficients(kept[static_cast<std::size_t>(c)]) = ls.beta(c + 1);
  r.model.coefficients(static_cast<Eigen::Index>(d)) = ls.beta(k + 1);
  r.model.intercept = ls.beta(0);
  r.model.fitted_on = FitScope::pooled;
  r.model.ridge_fallback = ls.ridge_fallback;
  r.effect = ls.beta(k + 1);
  return r;
}

Eigen::VectorXd Lr2Result::ite(const Eigen::MatrixXd& x) const {
  return treated.predict(x) - control.predict(x);
}

Lr2Result ols_lr2(const data::Dataset& data) {
  return {fit_arm(data, 1.0, FitScope::treated), fit_arm(data, 0.0, FitScope::control)};
}

}  // namespace cdnn::baselines
