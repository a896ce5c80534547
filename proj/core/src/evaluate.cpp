#include "kptune/evaluate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <thread>

#include "kptune/error.hpp"

namespace kptune {
namespace {

void check_subset(const PerfMatrix& pm, const ConfigSubset& subset) {
  if (subset.config_indices.empty()) throw InvalidArgument("evaluate: empty subset");
  for (std::size_t c : subset.config_indices) {
    if (c >= static_cast<std::size_t>(pm.cols())) throw InvalidArgument("evaluate: subset index out of range");
  }
}

double best_in_subset(const PerfMatrix& pm, Eigen::Index row, const ConfigSubset& subset) {
  double best = 0.0;
  for (std::size_t c : subset.config_indices) best = std::max(best, pm.value(row, static_cast<Eigen::Index>(c)));
  return best;
}

GridCell evaluate_cell(const PerfMatrix& train, const PerfMatrix& test, const Selector& selector,
                       const GridSpec& spec, SelectMethod method, std::size_t k) {
  GridCell cell;
  cell.method = method;
  cell.k = k;
  cell.subset = selector.select(method, k, spec.seed);
  cell.ceiling = subset_ceiling(test, cell.subset);
  cell.classifiers =
      score_subset(train, test, cell.subset, spec.classifiers, to_string(spec.scheme.kind), spec.seed);
  return cell;
}

}  // namespace

double geometric_mean(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("geometric_mean: no values");
  double log_sum = 0.0;
  for (double v : values) log_sum += std::log(v);
  return std::exp(log_sum / static_cast<double>(values.size()));
}

double subset_ceiling(const PerfMatrix& test, const ConfigSubset& subset) {
  check_subset(test, subset);
  const Eigen::VectorXd best = test.row_max();
  std::vector<double> ratios(static_cast<std::size_t>(test.rows()));
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    ratios[static_cast<std::size_t>(i)] = best_in_subset(test, i, subset) / best(i);
  }
  return geometric_mean(ratios);
}

EvalReport classifier_score(const PerfMatrix& test, const ConfigSubset& subset,
                            const Predictor& predict) {
  check_subset(test, subset);
  EvalReport report;
  report.k = subset.k_requested;
  report.method = subset.method;
  report.ceiling = subset_ceiling(test, subset);

  const Eigen::VectorXd best = test.row_max();
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(test.rows()));
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    const ProblemSize& p = test.problems()[static_cast<std::size_t>(i)];
    const int cls = predict(features_of(p));
    if (cls < 0 || static_cast<std::size_t>(cls) >= subset.config_indices.size()) {
      throw ContractError("classifier returned class " + std::to_string(cls) + " for a subset of size " +
                          std::to_string(subset.config_indices.size()));
    }
    const std::size_t col = subset.config_indices[static_cast<std::size_t>(cls)];
    const double ratio = test.value(i, static_cast<Eigen::Index>(col)) / best(i);
    ratios.push_back(ratio);
    report.per_row.push_back({p, col, ratio});
  }
  report.achieved = geometric_mean(ratios);
  if (!(report.achieved > 0.0 && report.achieved <= report.ceiling && report.ceiling <= 1.0)) {
    throw Error("classifier_score: achieved/ceiling ordering violated");
  }
  return report;
}

std::vector<ScoredClassifier> score_subset(const PerfMatrix& train, const PerfMatrix& test,
                                           const ConfigSubset& subset,
                                           std::span<const ClassifierKind> classifiers,
                                           std::string_view scheme_name, std::uint64_t seed) {
  const std::vector<int> labels = label_best_in_subset(normalize(train, NormScheme{}), subset);
  const std::vector<FeatureVector> features = features_of(train.problems());
  std::vector<ScoredClassifier> out;
  for (ClassifierKind kind : classifiers) {
    TrainedClassifier clf(kind, features, labels, seed);
    ScoredClassifier scored;
    scored.report = classifier_score(test, subset, [&clf](const FeatureVector& x) { return clf.predict(x); });
    scored.report.scheme = std::string(scheme_name);
    scored.report.classifier = std::string(to_string(kind));
    if (clf.tree() != nullptr) scored.tree = *clf.tree();
    out.push_back(std::move(scored));
  }
  return out;
}

std::vector<GridCell> run_grid(const PerfMatrix& train, const PerfMatrix& test, const GridSpec& spec) {
  return run_grid(Selector(normalize(train, spec.scheme), spec.select_options), train, test, spec);
}

std::vector<GridCell> run_grid(const Selector& selector, const PerfMatrix& train, const PerfMatrix& test,
                               const GridSpec& spec) {
  if (spec.methods.empty() || spec.k_values.empty()) {
    throw InvalidArgument("grid: need at least one method and one k");
  }
  if (train.configs() != test.configs()) throw InvalidArgument("grid: train/test config columns differ");

  struct Task {
    SelectMethod method;
    std::size_t k;
  };
  std::vector<Task> tasks;
  for (SelectMethod m : spec.methods)
    for (std::size_t k : spec.k_values) tasks.push_back({m, k});

  std::vector<std::optional<GridCell>> cells(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        cells[i] = evaluate_cell(train, test, selector, spec, tasks[i].method, tasks[i].k);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::vector<GridCell> out;
  out.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*cells[i]));
  }
  return out;
}

std::vector<EvalReport> grid_report(const PerfMatrix& train, const PerfMatrix& test,
                                    const GridSpec& spec) {
  std::vector<EvalReport> out;
  for (auto& cell : run_grid(train, test, spec)) {
    for (auto& c : cell.classifiers) out.push_back(std::move(c.report));
  }
  return out;
}

std::string format_fraction(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_eval_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "method,k,scheme,classifier,ceiling,achieved\n";
  for (const auto& r : reports) {
    out << r.method << ',' << r.k << ',' << r.scheme << ',' << r.classifier << ','
        << format_fraction(r.ceiling) << ',' << format_fraction(r.achieved) << '\n';
  }
}

void write_per_row_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "method,k,classifier,m,k_dim,n,batch,chosen_config,ratio\n";
  for (const auto& r : reports) {
    for (const auto& row : r.per_row) {
      out << r.method << ',' << r.k << ',' << r.classifier << ',' << row.problem.m << ','
          << row.problem.k << ',' << row.problem.n << ',' << row.problem.batch << ','
          << row.chosen_config << ',' << format_fraction(row.ratio) << '\n';
    }
  }
}

}  // namespace kptune
