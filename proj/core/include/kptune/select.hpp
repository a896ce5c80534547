#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "kptune/clustering.hpp"
#include "kptune/features.hpp"
#include "kptune/normalize.hpp"
#include "kptune/pca.hpp"

namespace kptune {

enum class SelectMethod { topn, kmeans, pca_kmeans, spectral, hdbscan, tree };

std::string_view to_string(SelectMethod m);
SelectMethod parse_select_method(std::string_view name);
std::vector<SelectMethod> all_select_methods();

/// Ordered, distinct column indices chosen for deployment.
struct ConfigSubset {
  std::vector<std::size_t> config_indices;
  std::string method;
  std::size_t k_requested = 0;

  std::size_t k_actual() const noexcept { return config_indices.size(); }
  bool operator==(const ConfigSubset&) const = default;
};

/// Column with the largest value; ties go to the lowest index.
Eigen::Index argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// The k columns that are a row's argmax most often (ties: lower column).
/// Returns fewer than k when fewer columns ever win.
ConfigSubset top_n(const NormMatrix& nm, std::size_t k);

/// Per-column win counts, as plotted in a config-count histogram.
std::vector<std::size_t> win_counts(const NormMatrix& nm);

/// Best-first multi-output regression tree from problem features to the
/// normalized performance vector, grown to at most k leaves; each leaf
/// contributes the argmax of its mean vector.
/// Throws InvalidArgument unless 1 <= k <= rows.
ConfigSubset tree_select(std::span<const FeatureVector> features, const NormMatrix& nm,
                         std::size_t k);

/// Turns a clustering into configs. With centroids (one row per cluster, in
/// the normalized space) each cluster picks its centroid's argmax; without,
/// the argmax of the per-column geometric mean over its members, zeros
/// counted as 1e-6. Noise rows are ignored, duplicates dropped. Clusters are
/// visited largest first (ties: lower label) and at most k_requested configs
/// are kept.
/// Throws EmptySelectionError when every row is noise.
ConfigSubset subset_from_clusters(const NormMatrix& nm, const ClusterLabels& labels,
                                  const Eigen::MatrixXd* centroids, std::size_t k_requested,
                                  std::string method);

struct SelectOptions {
  KMeansOptions kmeans;
  double pca_variance = 0.90;  // PCA+k-means keeps this share of variance
  int hdbscan_mcs_lo = 2;
  int hdbscan_mcs_hi = 0;      // 0: rows / 2
};

/// Runs any selection method against one normalized training matrix. PCA
/// results are computed once and reused across calls.
class Selector {
 public:
  explicit Selector(NormMatrix nm, SelectOptions options = {});

  ConfigSubset select(SelectMethod method, std::size_t k, std::uint64_t seed) const;

  const NormMatrix& data() const noexcept { return nm_; }
  const PcaModel& pca() const noexcept { return pca_; }
  Eigen::Index pca_components() const noexcept { return pca_components_; }

 private:
  NormMatrix nm_;
  SelectOptions options_;
  std::vector<FeatureVector> features_;
  PcaModel pca_;
  Eigen::Index pca_components_ = 0;
  Eigen::MatrixXd reduced_;
};

}  // namespace kptune
