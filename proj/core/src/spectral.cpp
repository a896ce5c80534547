#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "kptune/clustering.hpp"
#include "kptune/error.hpp"

namespace kptune {
namespace {

double median_pairwise(const Eigen::MatrixXd& dist) {
  const Eigen::Index n = dist.rows();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) values.push_back(dist(i, j));
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

ClusterLabels spectral_cluster(const Eigen::MatrixXd& points, int k, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (k < 2) throw InvalidArgument("spectral_cluster: k must be >= 2");
  if (n < k) throw InvalidArgument("spectral_cluster: fewer rows than clusters");

  const Eigen::MatrixXd dist = pairwise_distances(points);
  const double sigma = median_pairwise(dist);
  if (!(sigma > 0.0)) {
    throw DegenerateInputError("spectral_cluster: median pairwise distance is zero");
  }

  const double denom = 2.0 * sigma * sigma;
  Eigen::MatrixXd affinity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      affinity(i, j) = i == j ? 0.0 : std::exp(-dist(i, j) * dist(i, j) / denom);
    }
  }

  Eigen::VectorXd inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double deg = affinity.row(i).sum();
    inv_sqrt_deg(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }

  Eigen::MatrixXd laplacian = -(inv_sqrt_deg.asDiagonal() * affinity * inv_sqrt_deg.asDiagonal());
  laplacian.diagonal().array() += 1.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
  if (eig.info() != Eigen::Success) throw Error("spectral_cluster: eigensolver did not converge");

  Eigen::MatrixXd embedding = eig.eigenvectors().leftCols(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }

  return kmeans(embedding, k, seed).labels;
}

}  // namespace kptune
