#include <algorithm>
#include <cmath>
#include <limits>

#include "kptune/clustering.hpp"
#include "kptune/error.hpp"
#include "random.hpp"

namespace kptune {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sq_dist(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

RowMatrix kmeans_plus_plus(const RowMatrix& x, int k, detail::Rng& rng) {
  const Eigen::Index n = x.rows();
  RowMatrix centers(k, x.cols());
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);

  auto first = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
  centers.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(x, i, centers, 0);

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        // Rounding left target beyond the running sum: take the last
        // candidate with positive weight.
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (d2[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Every point coincides with a chosen center.
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = x.row(pick);
    chosen[static_cast<std::size_t>(pick)] = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], sq_dist(x, i, centers, c));
    }
  }
  return centers;
}

// Nearest center per point (ties to the lower center index); returns inertia.
double assign(const RowMatrix& x, const RowMatrix& centers, std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = sq_dist(x, i, centers, c);
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    inertia += best;
  }
  return inertia;
}

void update_centers(const RowMatrix& x, const std::vector<int>& labels, RowMatrix& centers) {
  const Eigen::Index k = centers.rows();
  RowMatrix sums = RowMatrix::Zero(k, x.cols());
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    sums.row(c) += x.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
  }

  // Re-seed empty clusters at the points farthest from their centroids.
  std::vector<char> taken(static_cast<std::size_t>(x.rows()), 0);
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const double d = sq_dist(x, i, centers, labels[static_cast<std::size_t>(i)]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    taken[static_cast<std::size_t>(far)] = 1;
    centers.row(c) = x.row(far);
  }
}

struct RunResult {
  RowMatrix centers;
  std::vector<int> labels;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

RunResult run_once(const RowMatrix& x, int k, detail::Rng& rng, int max_iter) {
  RunResult r;
  r.centers = kmeans_plus_plus(x, k, rng);
  r.labels.assign(static_cast<std::size_t>(x.rows()), 0);
  r.inertia = assign(x, r.centers, r.labels);
  r.trace.push_back(r.inertia);

  std::vector<int> next(r.labels.size());
  for (int it = 1; it <= max_iter; ++it) {
    update_centers(x, r.labels, r.centers);
    const double inertia = assign(x, r.centers, next);
    r.iterations = it;
    r.trace.push_back(inertia);
    r.inertia = inertia;
    if (next == r.labels) break;
    r.labels.swap(next);
  }
  return r;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
  if (points.rows() < k) throw InvalidArgument("kmeans: fewer rows than clusters");
  if (options.n_init < 1 || options.max_iter < 1) {
    throw InvalidArgument("kmeans: n_init and max_iter must be >= 1");
  }

  const RowMatrix x = points;
  detail::Rng rng(seed);
  RunResult best;
  bool have_best = false;
  for (int run = 0; run < options.n_init; ++run) {
    RunResult r = run_once(x, k, rng, options.max_iter);
    if (!have_best || r.inertia < best.inertia) {
      best = std::move(r);
      have_best = true;
    }
  }

  KMeansResult out;
  out.centroids = best.centers;
  out.labels.labels = std::move(best.labels);
  out.labels.n_clusters = k;
  out.inertia = best.inertia;
  out.iterations = best.iterations;
  out.inertia_trace = std::move(best.trace);
  return out;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const RowMatrix x = points;
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::sqrt(sq_dist(x, i, x, j));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

}  // namespace kptune
