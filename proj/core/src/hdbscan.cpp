#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <numeric>

#include "kptune/clustering.hpp"
#include "kptune/error.hpp"

namespace kptune {
namespace {

struct MergeStep {
  int left = 0;
  int right = 0;
  double distance = 0.0;
  int size = 0;
};

struct CondensedEdge {
  int parent = 0;  // cluster id (>= n_points)
  int child = 0;   // point id (< n_points) or cluster id
  double lambda = 0.0;
  int child_size = 0;
};

// Distances plus each row sorted ascending; shared by every run of a sweep.
struct DistanceTable {
  Eigen::MatrixXd dist;
  std::vector<std::vector<double>> sorted_rows;

  explicit DistanceTable(const Eigen::MatrixXd& points) : dist(pairwise_distances(points)) {
    const Eigen::Index n = dist.rows();
    sorted_rows.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& row = sorted_rows[static_cast<std::size_t>(i)];
      row.resize(static_cast<std::size_t>(n));
      for (Eigen::Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = dist(i, j);
      std::sort(row.begin(), row.end());
    }
  }

  int size() const { return static_cast<int>(dist.rows()); }
};

// Prim's algorithm on the dense mutual-reachability graph.
std::vector<MergeStep> mutual_reachability_mst(const DistanceTable& table,
                                               const std::vector<double>& core) {
  const int n = table.size();
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<int> from(static_cast<std::size_t>(n), -1);
  std::vector<MergeStep> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));

  int current = 0;
  in_tree[0] = 1;
  for (int step = 1; step < n; ++step) {
    for (int j = 0; j < n; ++j) {
      if (in_tree[static_cast<std::size_t>(j)]) continue;
      const double mr = std::max({core[static_cast<std::size_t>(current)],
                                  core[static_cast<std::size_t>(j)], table.dist(current, j)});
      if (mr < best[static_cast<std::size_t>(j)]) {
        best[static_cast<std::size_t>(j)] = mr;
        from[static_cast<std::size_t>(j)] = current;
      }
    }
    int next = -1;
    for (int j = 0; j < n; ++j) {
      if (in_tree[static_cast<std::size_t>(j)]) continue;
      if (next < 0 || best[static_cast<std::size_t>(j)] < best[static_cast<std::size_t>(next)]) next = j;
    }
    in_tree[static_cast<std::size_t>(next)] = 1;
    edges.push_back({from[static_cast<std::size_t>(next)], next, best[static_cast<std::size_t>(next)], 0});
    current = next;
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const MergeStep& a, const MergeStep& b) { return a.distance < b.distance; });
  return edges;
}

// Converts sorted MST edges into a scipy-style linkage: merge i creates node
// n + i from two existing nodes.
std::vector<MergeStep> single_linkage(const std::vector<MergeStep>& mst, int n) {
  std::vector<int> parent(static_cast<std::size_t>(2 * n - 1));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> size(static_cast<std::size_t>(2 * n - 1), 1);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };

  std::vector<MergeStep> out;
  out.reserve(mst.size());
  int next = n;
  for (const auto& e : mst) {
    const int a = find(e.left);
    const int b = find(e.right);
    const int merged = size[static_cast<std::size_t>(a)] + size[static_cast<std::size_t>(b)];
    out.push_back({a, b, e.distance, merged});
    parent[static_cast<std::size_t>(a)] = next;
    parent[static_cast<std::size_t>(b)] = next;
    size[static_cast<std::size_t>(next)] = merged;
    ++next;
  }
  return out;
}

std::vector<int> bfs_from(const std::vector<MergeStep>& linkage, int n, int root) {
  std::vector<int> order;
  std::deque<int> queue{root};
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop_front();
    order.push_back(node);
    if (node >= n) {
      const auto& m = linkage[static_cast<std::size_t>(node - n)];
      queue.push_back(m.left);
      queue.push_back(m.right);
    }
  }
  return order;
}

std::vector<CondensedEdge> condense(const std::vector<MergeStep>& linkage, int n,
                                    int min_cluster_size) {
  // Zero-distance merges (duplicate points) get a finite lambda above every
  // other one so stabilities stay finite.
  double max_lambda = 0.0;
  for (const auto& m : linkage) {
    if (m.distance > 0.0) max_lambda = std::max(max_lambda, 1.0 / m.distance);
  }
  const double zero_lambda = max_lambda > 0.0 ? 2.0 * max_lambda : 1.0;
  auto lambda_of = [&](double d) { return d > 0.0 ? 1.0 / d : zero_lambda; };
  auto size_of = [&](int node) {
    return node < n ? 1 : linkage[static_cast<std::size_t>(node - n)].size;
  };

  const int root = 2 * n - 2;
  std::vector<int> relabel(static_cast<std::size_t>(2 * n - 1), -1);
  std::vector<char> ignore(static_cast<std::size_t>(2 * n - 1), 0);
  relabel[static_cast<std::size_t>(root)] = n;
  int next_label = n + 1;
  std::vector<CondensedEdge> out;

  auto drop_subtree = [&](int parent_label, int node, double lambda) {
    for (int sub : bfs_from(linkage, n, node)) {
      if (sub < n) out.push_back({parent_label, sub, lambda, 1});
      ignore[static_cast<std::size_t>(sub)] = 1;
    }
  };

  for (int node : bfs_from(linkage, n, root)) {
    if (ignore[static_cast<std::size_t>(node)] || node < n) continue;
    const auto& m = linkage[static_cast<std::size_t>(node - n)];
    const double lambda = lambda_of(m.distance);
    const int label = relabel[static_cast<std::size_t>(node)];
    const int left_size = size_of(m.left);
    const int right_size = size_of(m.right);

    if (left_size >= min_cluster_size && right_size >= min_cluster_size) {
      relabel[static_cast<std::size_t>(m.left)] = next_label++;
      out.push_back({label, relabel[static_cast<std::size_t>(m.left)], lambda, left_size});
      relabel[static_cast<std::size_t>(m.right)] = next_label++;
      out.push_back({label, relabel[static_cast<std::size_t>(m.right)], lambda, right_size});
    } else if (left_size < min_cluster_size && right_size < min_cluster_size) {
      drop_subtree(label, m.left, lambda);
      drop_subtree(label, m.right, lambda);
    } else if (left_size < min_cluster_size) {
      relabel[static_cast<std::size_t>(m.right)] = label;
      drop_subtree(label, m.left, lambda);
    } else {
      relabel[static_cast<std::size_t>(m.left)] = label;
      drop_subtree(label, m.right, lambda);
    }
  }
  return out;
}

ClusterLabels extract_clusters(const std::vector<CondensedEdge>& tree, int n) {
  int max_id = n;
  for (const auto& e : tree) max_id = std::max({max_id, e.parent, e.child});
  const auto n_ids = static_cast<std::size_t>(max_id + 1);

  std::vector<double> birth(n_ids, 0.0);
  std::vector<int> cluster_parent(n_ids, -1);
  std::vector<std::vector<int>> children(n_ids);
  std::vector<int> point_parent(static_cast<std::size_t>(n), n);
  for (const auto& e : tree) {
    if (e.child >= n) {
      birth[static_cast<std::size_t>(e.child)] = e.lambda;
      cluster_parent[static_cast<std::size_t>(e.child)] = e.parent;
      children[static_cast<std::size_t>(e.parent)].push_back(e.child);
    } else {
      point_parent[static_cast<std::size_t>(e.child)] = e.parent;
    }
  }
  std::vector<double> stability(n_ids, 0.0);
  for (const auto& e : tree) {
    stability[static_cast<std::size_t>(e.parent)] +=
        (e.lambda - birth[static_cast<std::size_t>(e.parent)]) * e.child_size;
  }

  const int root = n;
  std::vector<char> selected(n_ids, 0);
  if (children[static_cast<std::size_t>(root)].empty()) {
    selected[static_cast<std::size_t>(root)] = 1;
  } else {
    for (int c = root + 1; c <= max_id; ++c) selected[static_cast<std::size_t>(c)] = 1;
    for (int c = max_id; c > root; --c) {
      double child_sum = 0.0;
      for (int ch : children[static_cast<std::size_t>(c)]) child_sum += stability[static_cast<std::size_t>(ch)];
      if (child_sum > stability[static_cast<std::size_t>(c)]) {
        selected[static_cast<std::size_t>(c)] = 0;
        stability[static_cast<std::size_t>(c)] = child_sum;
      } else {
        std::deque<int> queue(children[static_cast<std::size_t>(c)].begin(),
                              children[static_cast<std::size_t>(c)].end());
        while (!queue.empty()) {
          const int sub = queue.front();
          queue.pop_front();
          selected[static_cast<std::size_t>(sub)] = 0;
          for (int ch : children[static_cast<std::size_t>(sub)]) queue.push_back(ch);
        }
      }
    }
  }

  std::vector<int> label_of(n_ids, ClusterLabels::kNoise);
  int n_clusters = 0;
  for (std::size_t c = static_cast<std::size_t>(root); c < n_ids; ++c) {
    if (selected[c]) label_of[c] = n_clusters++;
  }

  ClusterLabels out;
  out.n_clusters = n_clusters;
  out.labels.assign(static_cast<std::size_t>(n), ClusterLabels::kNoise);
  for (int p = 0; p < n; ++p) {
    int c = point_parent[static_cast<std::size_t>(p)];
    while (c >= 0) {
      if (selected[static_cast<std::size_t>(c)]) {
        out.labels[static_cast<std::size_t>(p)] = label_of[static_cast<std::size_t>(c)];
        break;
      }
      c = cluster_parent[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

void check_preconditions(int n, int min_cluster_size, int min_samples) {
  if (min_cluster_size < 2) throw InvalidArgument("hdbscan: min_cluster_size must be >= 2");
  if (n < 2 * min_cluster_size) {
    throw InvalidArgument("hdbscan: need at least 2 * min_cluster_size rows");
  }
  if (min_samples < 1 || min_samples > n) {
    throw InvalidArgument("hdbscan: min_samples must be in [1, rows]");
  }
}

ClusterLabels run_hdbscan(const DistanceTable& table, int min_cluster_size, int min_samples) {
  const int n = table.size();
  std::vector<double> core(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    core[static_cast<std::size_t>(i)] =
        table.sorted_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(min_samples - 1)];
  }
  const auto mst = mutual_reachability_mst(table, core);
  const auto linkage = single_linkage(mst, n);
  const auto tree = condense(linkage, n, min_cluster_size);
  return extract_clusters(tree, n);
}

}  // namespace

ClusterLabels hdbscan(const Eigen::MatrixXd& points, int min_cluster_size, int min_samples) {
  check_preconditions(static_cast<int>(points.rows()), min_cluster_size, min_samples);
  const DistanceTable table(points);
  return run_hdbscan(table, min_cluster_size, min_samples);
}

HdbscanSweepResult hdbscan_sweep(const Eigen::MatrixXd& points, int k_target, int mcs_lo,
                                 int mcs_hi) {
  if (mcs_lo > mcs_hi) throw InvalidArgument("hdbscan_sweep: empty min_cluster_size range");
  const int n = static_cast<int>(points.rows());
  const int lo = std::max(mcs_lo, 2);
  const int hi = std::min(mcs_hi, n / 2);
  if (lo > hi) throw InvalidArgument("hdbscan_sweep: no usable min_cluster_size in range");

  const DistanceTable table(points);
  HdbscanSweepResult best;
  bool have = false;
  for (int mcs = lo; mcs <= hi; ++mcs) {
    ClusterLabels labels = run_hdbscan(table, mcs, mcs);
    if (!have || std::abs(labels.n_clusters - k_target) < std::abs(best.n_clusters - k_target)) {
      best.n_clusters = labels.n_clusters;
      best.min_cluster_size = mcs;
      best.labels = std::move(labels);
      have = true;
    }
  }
  return best;
}

}  // namespace kptune
