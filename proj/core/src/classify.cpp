#include "kptune/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "kptune/error.hpp"
#include "random.hpp"

namespace kptune {
namespace {

int majority(const std::vector<std::size_t>& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return static_cast<int>(best);
}

__extension__ using Wide = unsigned __int128;

// Split quality as the exact fraction num/den (see find_split).
struct Split {
  bool found = false;
  Wide num = 0;
  Wide den = 1;
  int feature = -1;
  double threshold = 0.0;
  std::size_t n_left = 0;
};

// Rows reaching a node, sorted by each feature in turn. Sorting happens once
// at the root; splits stably partition every list.
using SortedRows = std::array<std::vector<std::size_t>, kFeatureCount>;

class TreeBuilder {
 public:
  TreeBuilder(std::span<const FeatureVector> x, std::span<const int> y, int n_classes,
              const TreeParams& params, int max_features, detail::Rng* rng)
      : x_(x), y_(y), n_classes_(n_classes), params_(params), max_features_(max_features), rng_(rng) {}

  TreeModel build(const std::vector<std::size_t>& rows) {
    SortedRows sorted;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      sorted[f] = rows;
      std::stable_sort(sorted[f].begin(), sorted[f].end(),
                       [&](std::size_t a, std::size_t b) { return x_[a][f] < x_[b][f]; });
    }
    TreeModel model;
    grow(model, std::move(sorted), 0);
    return model;
  }

 private:
  std::vector<std::size_t> class_counts(const std::vector<std::size_t>& rows) const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes_), 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y_[r])];
    return counts;
  }

  int grow(TreeModel& model, SortedRows sorted, int depth) {
    const std::size_t n = sorted[0].size();
    const auto counts = class_counts(sorted[0]);
    const int idx = static_cast<int>(model.nodes.size());
    TreeNode node;
    node.label = majority(counts);
    node.samples = n;
    model.nodes.push_back(node);

    const bool pure = counts[static_cast<std::size_t>(node.label)] == n;
    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    const auto msl = static_cast<std::size_t>(params_.min_samples_leaf);
    if (pure || depth_capped || n < 2 * msl) return idx;

    const Split split = find_split(sorted, counts);
    if (!split.found) return idx;

    const auto sf = static_cast<std::size_t>(split.feature);
    SortedRows left;
    SortedRows right;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      left[f].reserve(split.n_left);
      right[f].reserve(n - split.n_left);
      for (std::size_t r : sorted[f]) (x_[r][sf] < split.threshold ? left[f] : right[f]).push_back(r);
      sorted[f].clear();
      sorted[f].shrink_to_fit();
    }
    model.nodes[static_cast<std::size_t>(idx)].feature = split.feature;
    model.nodes[static_cast<std::size_t>(idx)].threshold = split.threshold;
    const int l = grow(model, std::move(left), depth + 1);
    model.nodes[static_cast<std::size_t>(idx)].left = l;
    const int r = grow(model, std::move(right), depth + 1);
    model.nodes[static_cast<std::size_t>(idx)].right = r;
    return idx;
  }

  std::vector<int> candidate_features(const SortedRows& sorted) {
    std::vector<int> order(kFeatureCount);
    std::iota(order.begin(), order.end(), 0);
    if (rng_ == nullptr || max_features_ >= static_cast<int>(kFeatureCount)) return order;

    // Draw without replacement until max_features non-constant features have
    // been taken, or none are left.
    rng_->shuffle(std::span<int>(order));
    std::vector<int> chosen;
    for (int f : order) {
      if (static_cast<int>(chosen.size()) >= max_features_) break;
      const auto fi = static_cast<std::size_t>(f);
      if (x_[sorted[fi].front()][fi] < x_[sorted[fi].back()][fi]) chosen.push_back(f);
    }
    return chosen;
  }

  // Weighted child Gini impurity is 1 - (Sl/nl + Sr/nr)/n, with S the sum of
  // squared class counts. Maximizing (Sl*nr + Sr*nl)/(nl*nr) is the same, and
  // comparing that fraction in integers makes equal-gain ties exact. Sl and
  // Sr are updated in O(1) per row.
  Split find_split(const SortedRows& sorted, const std::vector<std::size_t>& counts) {
    const std::size_t n = sorted[0].size();
    const auto msl = static_cast<std::size_t>(params_.min_samples_leaf);
    std::size_t parent_sq = 0;
    for (std::size_t c : counts) parent_sq += c * c;
    Split best;

    std::vector<std::size_t> left_counts(counts.size());
    std::vector<std::size_t> right_counts(counts.size());
    for (int f : candidate_features(sorted)) {
      const auto fi = static_cast<std::size_t>(f);
      const auto& order = sorted[fi];
      std::fill(left_counts.begin(), left_counts.end(), 0);
      right_counts = counts;
      std::size_t left_sq = 0;
      std::size_t right_sq = parent_sq;
      for (std::size_t i = 1; i < n; ++i) {
        const auto cls = static_cast<std::size_t>(y_[order[i - 1]]);
        left_sq += 2 * left_counts[cls] + 1;
        right_sq -= 2 * right_counts[cls] - 1;
        ++left_counts[cls];
        --right_counts[cls];
        if (i < msl || n - i < msl) continue;
        const double lo = x_[order[i - 1]][fi];
        const double hi = x_[order[i]][fi];
        if (!(lo < hi)) continue;
        const Wide num = Wide{left_sq} * (n - i) + Wide{right_sq} * i;
        const Wide den = Wide{i} * (n - i);
        const Wide lhs = num * best.den;
        const Wide rhs = best.num * den;
        const bool better = !best.found || lhs > rhs || (lhs == rhs && f < best.feature);
        if (better) {
          best.found = true;
          best.num = num;
          best.den = den;
          best.feature = f;
          best.threshold = split_threshold(lo, hi);
          best.n_left = i;
        }
      }
    }
    return best;
  }

  std::span<const FeatureVector> x_;
  std::span<const int> y_;
  int n_classes_;
  TreeParams params_;
  int max_features_;
  detail::Rng* rng_;
};

int check_training_input(std::span<const FeatureVector> features, std::span<const int> labels) {
  if (features.empty()) throw InvalidArgument("classifier training: empty input");
  if (features.size() != labels.size()) {
    throw InvalidArgument("classifier training: feature/label count mismatch");
  }
  int max_label = 0;
  for (int l : labels) {
    if (l < 0) throw InvalidArgument("classifier training: negative label");
    max_label = std::max(max_label, l);
  }
  for (const auto& f : features) {
    for (double v : f) {
      if (!std::isfinite(v)) throw InvalidArgument("classifier training: non-finite feature");
    }
  }
  return max_label + 1;
}

}  // namespace

std::vector<int> label_best_in_subset(const NormMatrix& nm, const ConfigSubset& subset) {
  if (subset.config_indices.empty()) throw InvalidArgument("label_best_in_subset: empty subset");
  for (std::size_t c : subset.config_indices) {
    if (c >= static_cast<std::size_t>(nm.cols())) {
      throw InvalidArgument("label_best_in_subset: subset index out of range");
    }
  }
  std::vector<int> labels(static_cast<std::size_t>(nm.rows()), 0);
  for (Eigen::Index i = 0; i < nm.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < subset.config_indices.size(); ++s) {
      if (nm.values(i, static_cast<Eigen::Index>(subset.config_indices[s])) >
          nm.values(i, static_cast<Eigen::Index>(subset.config_indices[best]))) {
        best = s;
      }
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

int TreeModel::depth() const {
  if (nodes.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const auto& node = nodes[static_cast<std::size_t>(id)];
    deepest = std::max(deepest, d);
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeModel train_tree(std::span<const FeatureVector> features, std::span<const int> labels,
                     const TreeParams& params, std::uint64_t /*seed*/) {
  const int n_classes = check_training_input(features, labels);
  if (params.min_samples_leaf < 1) throw InvalidArgument("train_tree: min_samples_leaf must be >= 1");
  if (params.max_depth && *params.max_depth < 0) throw InvalidArgument("train_tree: negative max_depth");
  std::vector<std::size_t> rows(features.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  TreeBuilder builder(features, labels, n_classes, params, static_cast<int>(kFeatureCount), nullptr);
  return builder.build(rows);
}

int predict_tree(const TreeModel& model, const FeatureVector& x) {
  std::size_t id = 0;
  while (!model.nodes[id].is_leaf()) {
    const auto& node = model.nodes[id];
    id = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                                           : node.right);
  }
  return model.nodes[id].label;
}

ForestModel train_forest(std::span<const FeatureVector> features, std::span<const int> labels,
                         const ForestParams& params) {
  const int n_classes = check_training_input(features, labels);
  if (params.n_trees < 1) throw InvalidArgument("train_forest: n_trees must be >= 1");
  if (params.max_features < 1) throw InvalidArgument("train_forest: max_features must be >= 1");

  ForestModel forest;
  forest.n_classes = n_classes;
  forest.trees.reserve(static_cast<std::size_t>(params.n_trees));
  const std::size_t n = features.size();
  for (int t = 0; t < params.n_trees; ++t) {
    detail::Rng rng(params.seed + static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    TreeBuilder builder(features, labels, n_classes, TreeParams::preset_a(), params.max_features, &rng);
    forest.trees.push_back(builder.build(rows));
  }
  return forest;
}

int predict_forest(const ForestModel& model, const FeatureVector& x) {
  std::vector<std::size_t> votes(static_cast<std::size_t>(model.n_classes), 0);
  for (const auto& tree : model.trees) ++votes[static_cast<std::size_t>(predict_tree(tree, x))];
  return majority(votes);
}

KnnModel::KnnModel(std::span<const FeatureVector> features, std::span<const int> labels)
    : labels_(labels.begin(), labels.end()) {
  n_classes_ = check_training_input(features, labels);
  const auto n = static_cast<double>(features.size());
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double sum = 0.0;
    for (const auto& row : features) sum += row[f];
    mean_[f] = sum / n;
    double var = 0.0;
    for (const auto& row : features) var += (row[f] - mean_[f]) * (row[f] - mean_[f]);
    const double sd = std::sqrt(var / n);
    inv_std_[f] = sd > 0.0 ? 1.0 / sd : 0.0;
  }
  scaled_.reserve(features.size());
  for (const auto& row : features) {
    FeatureVector s{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) s[f] = (row[f] - mean_[f]) * inv_std_[f];
    scaled_.push_back(s);
  }
}

int KnnModel::predict(const FeatureVector& x, int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > scaled_.size()) {
    throw InvalidArgument("knn: k must be in [1, training size]");
  }
  FeatureVector q{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) q[f] = (x[f] - mean_[f]) * inv_std_[f];

  std::vector<std::pair<double, std::size_t>> dist(scaled_.size());
  for (std::size_t i = 0; i < scaled_.size(); ++i) {
    double d = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) d += (scaled_[i][f] - q[f]) * (scaled_[i][f] - q[f]);
    dist[i] = {d, i};
  }
  const auto kk = static_cast<std::ptrdiff_t>(k);
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());

  std::vector<std::size_t> votes(static_cast<std::size_t>(n_classes_), 0);
  for (std::ptrdiff_t i = 0; i < kk; ++i) ++votes[static_cast<std::size_t>(labels_[dist[static_cast<std::size_t>(i)].second])];
  return majority(votes);
}

int knn_predict(std::span<const FeatureVector> train_features, std::span<const int> train_labels,
                const FeatureVector& x, int k) {
  return KnnModel(train_features, train_labels).predict(x, k);
}

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::treeA: return "treeA";
    case ClassifierKind::treeB: return "treeB";
    case ClassifierKind::treeC: return "treeC";
    case ClassifierKind::knn1: return "knn1";
    case ClassifierKind::knn3: return "knn3";
    case ClassifierKind::knn7: return "knn7";
    case ClassifierKind::forest: return "forest";
  }
  return "unknown";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  for (ClassifierKind k : all_classifier_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown classifier '" + std::string(name) + "'");
}

std::vector<ClassifierKind> all_classifier_kinds() {
  return {ClassifierKind::treeA, ClassifierKind::treeB, ClassifierKind::treeC, ClassifierKind::knn1,
          ClassifierKind::knn3,  ClassifierKind::knn7,  ClassifierKind::forest};
}

bool is_tree(ClassifierKind kind) {
  return kind == ClassifierKind::treeA || kind == ClassifierKind::treeB || kind == ClassifierKind::treeC;
}

namespace {

std::variant<TreeModel, ForestModel, KnnModel> train_variant(ClassifierKind kind,
                                                             std::span<const FeatureVector> features,
                                                             std::span<const int> labels,
                                                             std::uint64_t seed) {
  switch (kind) {
    case ClassifierKind::treeA: return train_tree(features, labels, TreeParams::preset_a(), seed);
    case ClassifierKind::treeB: return train_tree(features, labels, TreeParams::preset_b(), seed);
    case ClassifierKind::treeC: return train_tree(features, labels, TreeParams::preset_c(), seed);
    case ClassifierKind::forest: {
      ForestParams p;
      p.seed = seed;
      return train_forest(features, labels, p);
    }
    case ClassifierKind::knn1:
    case ClassifierKind::knn3:
    case ClassifierKind::knn7:
      return KnnModel(features, labels);
  }
  throw InvalidArgument("unknown classifier kind");
}

int knn_k(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::knn1: return 1;
    case ClassifierKind::knn3: return 3;
    case ClassifierKind::knn7: return 7;
    default: return 0;
  }
}

}  // namespace

TrainedClassifier::TrainedClassifier(ClassifierKind kind, std::span<const FeatureVector> features,
                                     std::span<const int> labels, std::uint64_t seed)
    : kind_(kind), model_(train_variant(kind, features, labels, seed)) {
  if (knn_k(kind) > static_cast<int>(features.size())) {
    throw InvalidArgument(std::string(to_string(kind)) + ": fewer training rows than neighbours");
  }
}

int TrainedClassifier::predict(const FeatureVector& x) const {
  if (const auto* tree = std::get_if<TreeModel>(&model_)) return predict_tree(*tree, x);
  if (const auto* forest = std::get_if<ForestModel>(&model_)) return predict_forest(*forest, x);
  return std::get<KnnModel>(model_).predict(x, knn_k(kind_));
}

}  // namespace kptune
