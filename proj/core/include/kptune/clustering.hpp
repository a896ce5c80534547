#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace kptune {

/// Cluster assignment per input row. Labels are 0..n_clusters-1, or kNoise
/// for rows HDBSCAN leaves unclustered.
struct ClusterLabels {
  static constexpr int kNoise = -1;

  std::vector<int> labels;
  int n_clusters = 0;

  bool operator==(const ClusterLabels&) const = default;
};

struct KMeansOptions {
  int n_init = 10;     // k-means++ restarts; the lowest-inertia run wins
  int max_iter = 300;
};

struct KMeansResult {
  Eigen::MatrixXd centroids;  // k x dims
  ClusterLabels labels;
  double inertia = 0.0;
  int iterations = 0;
  // Objective after every assignment step of the winning run.
  std::vector<double> inertia_trace;
};

/// Lloyd's algorithm from k-means++ seeds. Iterates until the assignment is a
/// fixpoint or max_iter is reached; an emptied cluster is re-seeded at the
/// point farthest from its centroid. Deterministic for a given seed.
/// Throws InvalidArgument unless 1 <= k <= rows.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Normalized spectral clustering (Ng, Jordan, Weiss).
///
/// Fully connected Gaussian affinity with sigma set to the median pairwise
/// distance, symmetric normalized Laplacian, embedding in the k eigenvectors
/// of smallest eigenvalue with rows scaled to unit length, then k-means.
/// Throws InvalidArgument unless 2 <= k <= rows, DegenerateInputError when
/// sigma is zero.
ClusterLabels spectral_cluster(const Eigen::MatrixXd& points, int k, std::uint64_t seed);

/// HDBSCAN with excess-of-mass cluster extraction.
///
/// The core distance of a point is its distance to the min_samples-th
/// nearest point, counting the point itself. The root of the condensed tree
/// is only reported as a cluster when it has no child clusters.
/// Throws InvalidArgument unless min_cluster_size >= 2,
/// rows >= 2 * min_cluster_size and 1 <= min_samples <= rows.
ClusterLabels hdbscan(const Eigen::MatrixXd& points, int min_cluster_size, int min_samples);

struct HdbscanSweepResult {
  ClusterLabels labels;
  int min_cluster_size = 0;
  int n_clusters = 0;
};

/// Runs hdbscan for every min_cluster_size in [mcs_lo, mcs_hi] (with
/// min_samples equal to it) and keeps the labeling whose cluster count is
/// closest to k_target; ties go to the smaller min_cluster_size. Values of
/// the range violating hdbscan's preconditions are skipped. Throws
/// InvalidArgument when no value in the range is usable.
HdbscanSweepResult hdbscan_sweep(const Eigen::MatrixXd& points, int k_target, int mcs_lo,
                                 int mcs_hi);

/// Pairwise Euclidean distances between rows.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);

}  // namespace kptune
