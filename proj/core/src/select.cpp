#include "kptune/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kptune/error.hpp"

namespace kptune {
namespace {

constexpr double kGeomeanZero = 1e-6;
// Relative gain below which a regression-tree split counts as no improvement.
constexpr double kMinRelativeGain = 1e-12;

void append_unique(std::vector<std::size_t>& out, std::size_t v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

struct RegressionSplit {
  double gain = -std::numeric_limits<double>::infinity();
  std::size_t feature = 0;
  double threshold = 0.0;
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

struct RegressionLeaf {
  std::vector<std::size_t> rows;
  RegressionSplit split;
};

RegressionSplit best_regression_split(std::span<const FeatureVector> features,
                                      const Eigen::MatrixXd& y,
                                      const std::vector<std::size_t>& rows) {
  RegressionSplit best;
  const std::size_t n = rows.size();
  if (n < 2) return best;

  const Eigen::Index d = y.cols();
  Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(d);
  double total_sq = 0.0;
  for (std::size_t r : rows) {
    total += y.row(static_cast<Eigen::Index>(r));
    total_sq += y.row(static_cast<Eigen::Index>(r)).squaredNorm();
  }
  const double parent_sse = total_sq - total.squaredNorm() / static_cast<double>(n);

  std::vector<std::size_t> order = rows;
  Eigen::RowVectorXd prefix(d);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return features[a][f] < features[b][f];
    });
    prefix.setZero();
    double prefix_sq = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      const auto prev = static_cast<Eigen::Index>(order[i - 1]);
      prefix += y.row(prev);
      prefix_sq += y.row(prev).squaredNorm();
      const double lo = features[order[i - 1]][f];
      const double hi = features[order[i]][f];
      if (!(lo < hi)) continue;
      const auto nl = static_cast<double>(i);
      const auto nr = static_cast<double>(n - i);
      const double sse_left = prefix_sq - prefix.squaredNorm() / nl;
      const double sse_right = (total_sq - prefix_sq) - (total - prefix).squaredNorm() / nr;
      const double gain = parent_sse - sse_left - sse_right;
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = f;
        best.threshold = split_threshold(lo, hi);
      }
    }
  }
  if (std::isfinite(best.gain)) {
    for (std::size_t r : rows) {
      (features[r][best.feature] < best.threshold ? best.left : best.right).push_back(r);
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(SelectMethod m) {
  switch (m) {
    case SelectMethod::topn: return "topn";
    case SelectMethod::kmeans: return "kmeans";
    case SelectMethod::pca_kmeans: return "pca_kmeans";
    case SelectMethod::spectral: return "spectral";
    case SelectMethod::hdbscan: return "hdbscan";
    case SelectMethod::tree: return "tree";
  }
  return "unknown";
}

SelectMethod parse_select_method(std::string_view name) {
  for (SelectMethod m : all_select_methods()) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown selection method '" + std::string(name) + "'");
}

std::vector<SelectMethod> all_select_methods() {
  return {SelectMethod::topn,     SelectMethod::kmeans,  SelectMethod::pca_kmeans,
          SelectMethod::spectral, SelectMethod::hdbscan, SelectMethod::tree};
}

Eigen::Index argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = j;
  }
  return best;
}

std::vector<std::size_t> win_counts(const NormMatrix& nm) {
  std::vector<std::size_t> wins(static_cast<std::size_t>(nm.cols()), 0);
  for (Eigen::Index i = 0; i < nm.rows(); ++i) ++wins[static_cast<std::size_t>(argmax(nm.values.row(i)))];
  return wins;
}

ConfigSubset top_n(const NormMatrix& nm, std::size_t k) {
  if (k < 1) throw InvalidArgument("top_n: k must be >= 1");
  const auto wins = win_counts(nm);
  std::vector<std::size_t> winners;
  for (std::size_t j = 0; j < wins.size(); ++j) {
    if (wins[j] > 0) winners.push_back(j);
  }
  std::stable_sort(winners.begin(), winners.end(),
                   [&](std::size_t a, std::size_t b) { return wins[a] > wins[b]; });
  if (winners.size() > k) winners.resize(k);
  return ConfigSubset{std::move(winners), "topn", k};
}

ConfigSubset tree_select(std::span<const FeatureVector> features, const NormMatrix& nm,
                         std::size_t k) {
  const auto n = static_cast<std::size_t>(nm.rows());
  if (k < 1) throw InvalidArgument("tree_select: k must be >= 1");
  if (features.size() != n) throw InvalidArgument("tree_select: feature/row count mismatch");
  if (n < k) throw InvalidArgument("tree_select: fewer rows than requested leaves");

  std::vector<RegressionLeaf> leaves(1);
  leaves[0].rows.resize(n);
  std::iota(leaves[0].rows.begin(), leaves[0].rows.end(), std::size_t{0});
  leaves[0].split = best_regression_split(features, nm.values, leaves[0].rows);

  double root_sse = 0.0;
  {
    const Eigen::RowVectorXd mean = nm.values.colwise().mean();
    root_sse = (nm.values.rowwise() - mean).squaredNorm();
  }
  const double min_gain = kMinRelativeGain * std::max(root_sse, 1.0);

  // Leaves stay in left-to-right order; the split with the largest gain goes
  // first, ties to the leftmost leaf.
  while (leaves.size() < k) {
    std::size_t pick = leaves.size();
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (!(leaves[i].split.gain > min_gain)) continue;
      if (pick == leaves.size() || leaves[i].split.gain > leaves[pick].split.gain) pick = i;
    }
    if (pick == leaves.size()) break;

    RegressionSplit s = std::move(leaves[pick].split);
    RegressionLeaf left{std::move(s.left), {}};
    RegressionLeaf right{std::move(s.right), {}};
    left.split = best_regression_split(features, nm.values, left.rows);
    right.split = best_regression_split(features, nm.values, right.rows);
    leaves[pick] = std::move(left);
    leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(pick) + 1, std::move(right));
  }

  ConfigSubset out{{}, "tree", k};
  for (const auto& leaf : leaves) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(nm.cols());
    for (std::size_t r : leaf.rows) mean += nm.values.row(static_cast<Eigen::Index>(r));
    mean /= static_cast<double>(leaf.rows.size());
    append_unique(out.config_indices, static_cast<std::size_t>(argmax(mean)));
  }
  return out;
}

ConfigSubset subset_from_clusters(const NormMatrix& nm, const ClusterLabels& labels,
                                  const Eigen::MatrixXd* centroids, std::size_t k_requested,
                                  std::string method) {
  if (labels.labels.size() != static_cast<std::size_t>(nm.rows())) {
    throw InvalidArgument("subset_from_clusters: label count does not match rows");
  }
  if (centroids != nullptr &&
      (centroids->rows() != labels.n_clusters || centroids->cols() != nm.cols())) {
    throw InvalidArgument("subset_from_clusters: centroid shape mismatch");
  }

  const auto n_clusters = static_cast<std::size_t>(labels.n_clusters);
  std::vector<std::size_t> sizes(n_clusters, 0);
  Eigen::MatrixXd log_sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_clusters), nm.cols());
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const int c = labels.labels[i];
    if (c == ClusterLabels::kNoise) continue;
    if (c < 0 || static_cast<std::size_t>(c) >= n_clusters) {
      throw InvalidArgument("subset_from_clusters: label out of range");
    }
    ++sizes[static_cast<std::size_t>(c)];
    if (centroids == nullptr) {
      for (Eigen::Index j = 0; j < nm.cols(); ++j) {
        log_sums(c, j) += std::log(std::max(nm.values(static_cast<Eigen::Index>(i), j), kGeomeanZero));
      }
    }
  }

  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < n_clusters; ++c) {
    if (sizes[c] > 0) order.push_back(c);
  }
  if (order.empty()) throw EmptySelectionError("subset_from_clusters: every row is noise");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });

  ConfigSubset out{{}, std::move(method), k_requested};
  for (std::size_t c : order) {
    if (out.config_indices.size() >= k_requested) break;
    const auto ci = static_cast<Eigen::Index>(c);
    // Mean log is the log of the geometric mean, so argmax agrees.
    const Eigen::Index best = centroids != nullptr ? argmax(centroids->row(ci)) : argmax(log_sums.row(ci));
    append_unique(out.config_indices, static_cast<std::size_t>(best));
  }
  return out;
}

Selector::Selector(NormMatrix nm, SelectOptions options)
    : nm_(std::move(nm)), options_(options), features_(features_of(nm_.problems)) {
  if (nm_.rows() >= 2) {
    pca_ = fit_pca(nm_);
    pca_components_ = static_cast<Eigen::Index>(components_for_variance(pca_, options_.pca_variance));
    reduced_ = transform(pca_, nm_, pca_components_);
  }
}

ConfigSubset Selector::select(SelectMethod method, std::size_t k, std::uint64_t seed) const {
  if (k < 1) throw InvalidArgument("select: k must be >= 1");
  const int ki = static_cast<int>(k);
  switch (method) {
    case SelectMethod::topn:
      return top_n(nm_, k);
    case SelectMethod::kmeans: {
      const KMeansResult r = kmeans(nm_.values, ki, seed, options_.kmeans);
      return subset_from_clusters(nm_, r.labels, &r.centroids, k, "kmeans");
    }
    case SelectMethod::pca_kmeans: {
      if (pca_components_ == 0) throw InvalidArgument("select: PCA needs at least 2 rows");
      const KMeansResult r = kmeans(reduced_, ki, seed, options_.kmeans);
      const Eigen::MatrixXd centroids = inverse_transform(pca_, r.centroids);
      return subset_from_clusters(nm_, r.labels, &centroids, k, "pca_kmeans");
    }
    case SelectMethod::spectral: {
      const ClusterLabels labels = spectral_cluster(nm_.values, ki, seed);
      return subset_from_clusters(nm_, labels, nullptr, k, "spectral");
    }
    case SelectMethod::hdbscan: {
      const int hi = options_.hdbscan_mcs_hi > 0 ? options_.hdbscan_mcs_hi
                                                 : static_cast<int>(nm_.rows() / 2);
      const HdbscanSweepResult r = hdbscan_sweep(nm_.values, ki, options_.hdbscan_mcs_lo, hi);
      return subset_from_clusters(nm_, r.labels, nullptr, k, "hdbscan");
    }
    case SelectMethod::tree:
      return tree_select(features_, nm_, k);
  }
  throw InvalidArgument("select: unknown method");
}

}  // namespace kptune
