#include "kptune/pca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "kptune/error.hpp"

namespace kptune {
namespace {

// Cumulative sums are compared with a little slack so that e.g. 0.5 + 0.3
// counts as reaching 0.8.
constexpr double kThresholdSlack = 1e-12;

}  // namespace

PcaModel fit_pca(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) throw InvalidArgument("fit_pca: need at least 2 rows");
  if (rows.cols() < 1) throw InvalidArgument("fit_pca: need at least 1 column");

  PcaModel model;
  model.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::Index keep = std::min<Eigen::Index>(rows.rows() - 1, rows.cols());

  model.components = svd.matrixV().leftCols(keep);
  model.singular_values = sv.head(keep);

  for (Eigen::Index c = 0; c < keep; ++c) {
    auto axis = model.components.col(c);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
  }

  const double total = sv.squaredNorm();
  model.explained_ratio = Eigen::VectorXd::Zero(keep);
  if (total > 0.0) {
    for (Eigen::Index c = 0; c < keep; ++c) model.explained_ratio(c) = sv(c) * sv(c) / total;
  }
  return model;
}

PcaModel fit_pca(const NormMatrix& nm) { return fit_pca(nm.values); }

Eigen::MatrixXd transform(const PcaModel& model, const Eigen::MatrixXd& rows,
                          Eigen::Index n_components) {
  if (n_components < 1 || n_components > model.retained()) {
    throw InvalidArgument("transform: n_components must be in [1, " +
                          std::to_string(model.retained()) + "]");
  }
  if (rows.cols() != model.mean.size()) throw InvalidArgument("transform: column count mismatch");
  return (rows.rowwise() - model.mean.transpose()) * model.components.leftCols(n_components);
}

Eigen::MatrixXd transform(const PcaModel& model, const NormMatrix& nm, Eigen::Index n_components) {
  return transform(model, nm.values, n_components);
}

Eigen::MatrixXd inverse_transform(const PcaModel& model, const Eigen::MatrixXd& reduced) {
  if (reduced.cols() < 1 || reduced.cols() > model.retained()) {
    throw InvalidArgument("inverse_transform: bad component count");
  }
  Eigen::MatrixXd out = reduced * model.components.leftCols(reduced.cols()).transpose();
  out.rowwise() += model.mean.transpose();
  return out;
}

std::size_t components_for_variance(const PcaModel& model, double threshold) {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < model.explained_ratio.size(); ++c) {
    acc += model.explained_ratio(c);
    if (acc + kThresholdSlack >= threshold) return static_cast<std::size_t>(c + 1);
  }
  return static_cast<std::size_t>(model.retained());
}

VarianceReport variance_report(const PcaModel& model) {
  VarianceReport report;
  double acc = 0.0;
  for (Eigen::Index c = 0; c < model.explained_ratio.size(); ++c) {
    acc += model.explained_ratio(c);
    report.explained.push_back(model.explained_ratio(c));
    report.cumulative.push_back(acc);
  }
  report.components_80 = components_for_variance(model, 0.80);
  report.components_90 = components_for_variance(model, 0.90);
  report.components_95 = components_for_variance(model, 0.95);
  return report;
}

}  // namespace kptune
