#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "kptune/features.hpp"
#include "kptune/normalize.hpp"
#include "kptune/select.hpp"

namespace kptune {

/// Per row, the subset-local index of the best subset column (ties: lowest).
std::vector<int> label_best_in_subset(const NormMatrix& nm, const ConfigSubset& subset);

struct TreeParams {
  std::optional<int> max_depth;  // edges from root to deepest leaf
  int min_samples_leaf = 1;

  static TreeParams preset_a() { return {std::nullopt, 1}; }
  static TreeParams preset_b() { return {6, 3}; }
  static TreeParams preset_c() { return {3, 4}; }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;  // majority class of the training rows reaching this node
  std::size_t samples = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Decision tree stored in preorder; node 0 is the root.
struct TreeModel {
  std::vector<TreeNode> nodes;

  int depth() const;
  std::size_t leaf_count() const;
  bool operator==(const TreeModel&) const = default;
};

/// CART with Gini impurity over midpoints between sorted distinct feature
/// values. Stops on pure nodes, the depth cap, or when no split leaves
/// min_samples_leaf rows on both sides. Ties between equally good splits go to
/// the lower feature index, then the lower threshold. `seed` only matters when
/// features are subsampled (forests); plain trees are fully deterministic.
/// Throws InvalidArgument on empty input or negative labels.
TreeModel train_tree(std::span<const FeatureVector> features, std::span<const int> labels,
                     const TreeParams& params, std::uint64_t seed = 0);

/// Left iff feature < threshold.
int predict_tree(const TreeModel& model, const FeatureVector& x);

struct ForestParams {
  int n_trees = 100;
  int max_features = 2;  // ceil(sqrt(4))
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  int n_classes = 0;
};

/// Tree t is trained from seed + t on a bootstrap sample, drawing
/// max_features candidate features per node; trees are unpruned.
ForestModel train_forest(std::span<const FeatureVector> features, std::span<const int> labels,
                         const ForestParams& params);

/// Majority vote, ties to the lowest class.
int predict_forest(const ForestModel& model, const FeatureVector& x);

/// k-nearest neighbours on z-scored features. Statistics come from the
/// training rows only; zero-variance features are ignored.
class KnnModel {
 public:
  KnnModel(std::span<const FeatureVector> features, std::span<const int> labels);

  /// Distance ties go to the lower training row, vote ties to the lower class.
  /// Throws InvalidArgument unless 1 <= k <= training size.
  int predict(const FeatureVector& x, int k) const;

  std::size_t size() const noexcept { return labels_.size(); }

 private:
  FeatureVector mean_{};
  FeatureVector inv_std_{};
  std::vector<FeatureVector> scaled_;
  std::vector<int> labels_;
  int n_classes_ = 0;
};

int knn_predict(std::span<const FeatureVector> train_features, std::span<const int> train_labels,
                const FeatureVector& x, int k);

enum class ClassifierKind { treeA, treeB, treeC, knn1, knn3, knn7, forest };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view name);
std::vector<ClassifierKind> all_classifier_kinds();
bool is_tree(ClassifierKind kind);

/// Any trained runtime selector behind one predict() call.
class TrainedClassifier {
 public:
  TrainedClassifier(ClassifierKind kind, std::span<const FeatureVector> features,
                    std::span<const int> labels, std::uint64_t seed);

  int predict(const FeatureVector& x) const;
  ClassifierKind kind() const noexcept { return kind_; }
  /// The decision tree for treeA/B/C, nullptr otherwise.
  const TreeModel* tree() const noexcept { return std::get_if<TreeModel>(&model_); }

 private:
  ClassifierKind kind_;
  std::variant<TreeModel, ForestModel, KnnModel> model_;
};

}  // namespace kptune
