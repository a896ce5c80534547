#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "kptune/normalize.hpp"

namespace kptune {

/// Principal axes of a set of performance rows.
///
/// `components` holds one unit column per retained component, ordered by
/// descending singular value, each with its largest-magnitude entry positive.
/// `explained_ratio(i)` is sigma_i^2 / sum_j sigma_j^2; all zero when the data
/// has no variance.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // features x retained
  Eigen::VectorXd singular_values;
  Eigen::VectorXd explained_ratio;

  Eigen::Index retained() const noexcept { return components.cols(); }
};

/// SVD of the column-centered matrix; retains min(rows - 1, cols) components.
/// Throws InvalidArgument for fewer than two rows.
PcaModel fit_pca(const Eigen::MatrixXd& rows);
PcaModel fit_pca(const NormMatrix& nm);

/// Projects centered rows onto the first `n_components` axes.
/// Throws InvalidArgument unless 1 <= n_components <= retained().
Eigen::MatrixXd transform(const PcaModel& model, const Eigen::MatrixXd& rows,
                          Eigen::Index n_components);
Eigen::MatrixXd transform(const PcaModel& model, const NormMatrix& nm, Eigen::Index n_components);

/// Maps reduced coordinates back to the original space.
Eigen::MatrixXd inverse_transform(const PcaModel& model, const Eigen::MatrixXd& reduced);

struct VarianceReport {
  std::vector<double> explained;
  std::vector<double> cumulative;
  // Smallest component counts whose cumulative share reaches 0.80 / 0.90 /
  // 0.95. When the threshold is never reached (zero-variance data) the count
  // is the number of retained components.
  std::size_t components_80 = 0;
  std::size_t components_90 = 0;
  std::size_t components_95 = 0;
};

VarianceReport variance_report(const PcaModel& model);

/// Smallest count of leading components whose cumulative explained share is
/// at least `threshold`, or retained() if none is.
std::size_t components_for_variance(const PcaModel& model, double threshold);

}  // namespace kptune
