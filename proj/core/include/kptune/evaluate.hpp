#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kptune/classify.hpp"
#include "kptune/dataset.hpp"
#include "kptune/normalize.hpp"
#include "kptune/select.hpp"

namespace kptune {

struct RowResult {
  ProblemSize problem;
  std::size_t chosen_config = 0;  // column in the full matrix
  double ratio = 0.0;             // chosen / best over all columns
};

struct EvalReport {
  std::string method;
  std::size_t k = 0;
  std::string scheme;
  std::string classifier;
  double ceiling = 0.0;   // geometric mean of best-in-subset ratios
  double achieved = 0.0;  // geometric mean of classifier-choice ratios
  std::vector<RowResult> per_row;
};

double geometric_mean(std::span<const double> values);

/// Geometric mean over test rows of (best subset value / best overall value).
/// Throws InvalidArgument on an empty or out-of-range subset.
double subset_ceiling(const PerfMatrix& test, const ConfigSubset& subset);

using Predictor = std::function<int(const FeatureVector&)>;

/// Scores a runtime selector that maps features to a subset-local class.
/// Throws ContractError when the predictor returns a class outside the
/// subset.
EvalReport classifier_score(const PerfMatrix& test, const ConfigSubset& subset,
                            const Predictor& predict);

struct GridSpec {
  std::vector<SelectMethod> methods;
  std::vector<std::size_t> k_values;
  NormScheme scheme;
  std::vector<ClassifierKind> classifiers;
  std::uint64_t seed = 0;
  int jobs = 1;
  SelectOptions select_options;
};

struct ScoredClassifier {
  EvalReport report;
  std::optional<TreeModel> tree;  // set for the decision-tree presets
};

struct GridCell {
  SelectMethod method = SelectMethod::topn;
  std::size_t k = 0;
  ConfigSubset subset;
  double ceiling = 0.0;
  std::vector<ScoredClassifier> classifiers;
};

/// Trains each classifier on the training rows' best-in-subset labels and
/// scores it on test. Labels come from raw ratios, never the clustering
/// scheme; `scheme_name` only tags the reports.
std::vector<ScoredClassifier> score_subset(const PerfMatrix& train, const PerfMatrix& test,
                                           const ConfigSubset& subset,
                                           std::span<const ClassifierKind> classifiers,
                                           std::string_view scheme_name, std::uint64_t seed);

/// Every (method, k) cell in grid order: select on the normalized training
/// data, score the subset ceiling on test, then score_subset. Cells may run
/// on `jobs` threads; the result order never depends on scheduling.
std::vector<GridCell> run_grid(const PerfMatrix& train, const PerfMatrix& test, const GridSpec& spec);
/// Same, reusing a selector already built on the normalized training data;
/// spec.scheme and spec.select_options are then only used as tags.
std::vector<GridCell> run_grid(const Selector& selector, const PerfMatrix& train, const PerfMatrix& test,
                               const GridSpec& spec);

/// Flattened reports of run_grid in grid order.
std::vector<EvalReport> grid_report(const PerfMatrix& train, const PerfMatrix& test,
                                    const GridSpec& spec);

/// `method,k,scheme,classifier,ceiling,achieved`, six decimals.
void write_eval_csv(std::ostream& out, std::span<const EvalReport> reports);
/// `method,k,classifier,m,k_dim,n,batch,chosen_config,ratio`.
void write_per_row_csv(std::ostream& out, std::span<const EvalReport> reports);

std::string format_fraction(double v);

}  // namespace kptune
