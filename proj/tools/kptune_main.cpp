// kptune command-line driver. Exit codes: 0 ok, 1 usage, 2 data, 3 internal.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kptune/codegen.hpp"
#include "kptune/error.hpp"
#include "kptune/pipeline.hpp"

namespace {

using namespace kptune;

// "4,5,8-11" style lists arrive split on commas; each token may be a range.
std::vector<std::size_t> expand_k(const std::vector<std::string>& tokens) {
  std::vector<std::size_t> out;
  for (const auto& t : tokens) {
    const auto dash = t.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoul(t));
      } else {
        const std::size_t lo = std::stoul(t.substr(0, dash));
        const std::size_t hi = std::stoul(t.substr(dash + 1));
        if (lo > hi) throw InvalidArgument("empty k range '" + t + "'");
        for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
      }
    } catch (const std::logic_error&) {
      throw InvalidArgument("bad --k value '" + t + "'");
    }
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_all(const std::vector<std::string>& names, Parse&& parse) {
  std::vector<T> out;
  for (const auto& n : names) out.push_back(parse(n));
  return out;
}

std::uint64_t env_seed() {
  const char* s = std::getenv("KP_SEED");
  if (s == nullptr || *s == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(std::string("KP_SEED is not an unsigned integer: '") + s + "'");
  }
}

struct SeedOption {
  std::optional<std::uint64_t> flag;
  std::uint64_t resolve() const { return flag ? *flag : env_seed(); }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

const std::vector<std::string> kSchemeNames{"scaled", "raw_cutoff", "std_cutoff", "sigmoid"};
const std::vector<std::string> kMethodNames{"topn", "kmeans", "pca_kmeans", "spectral", "hdbscan", "tree"};
const std::vector<std::string> kClassifierNames{"treeA", "treeB", "treeC", "knn1", "knn3", "knn7", "forest"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kptune: kernel configuration pruning and runtime selector generation"};
  app.require_subcommand(1);

  // ingest
  std::string ingest_input;
  auto* ingest = app.add_subcommand("ingest", "Validate a benchmark CSV and print its grid summary");
  ingest->add_option("--input", ingest_input, "Benchmark CSV")->required();

  // synth
  std::string synth_output;
  std::size_t synth_problems = 300;
  double synth_noise = SynthModel{}.noise_sigma;
  SeedOption synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark CSV over the 640-config space");
  synth->add_option("--output", synth_output, "Output CSV (default stdout)");
  synth->add_option("--problems", synth_problems, "Number of problem sizes")->check(CLI::PositiveNumber);
  synth->add_option("--noise", synth_noise, "Relative noise sigma")->check(CLI::Range(0.0, 0.4999));
  synth->add_option("--seed", synth_seed.flag, "Seed (falls back to KP_SEED)");

  // pca-report
  std::string pca_input;
  std::string pca_output;
  std::string pca_scheme = "scaled";
  auto* pca = app.add_subcommand("pca-report", "PCA explained-variance report of a normalized dataset");
  pca->add_option("--input", pca_input, "Benchmark CSV")->required();
  pca->add_option("--scheme", pca_scheme, "Normalization scheme")->check(CLI::IsMember(kSchemeNames));
  pca->add_option("--output", pca_output, "Output CSV (default stdout)");

  // select
  std::string select_input;
  std::string select_output;
  std::string select_scheme = "scaled";
  std::vector<std::string> select_methods = kMethodNames;
  std::vector<std::string> select_k{"4-15"};
  SeedOption select_seed;
  auto* sel = app.add_subcommand("select", "Choose configuration subsets from training data");
  sel->add_option("--input", select_input, "Training CSV")->required();
  sel->add_option("--scheme", select_scheme, "Normalization scheme")->check(CLI::IsMember(kSchemeNames));
  sel->add_option("--method", select_methods, "Selection methods")->delimiter(',')->check(CLI::IsMember(kMethodNames));
  sel->add_option("--k", select_k, "Subset sizes, e.g. 4,8 or 4-15")->delimiter(',');
  sel->add_option("--seed", select_seed.flag, "Seed (falls back to KP_SEED)");
  sel->add_option("--output", select_output, "Subsets CSV (default stdout)");

  // train
  std::string train_input;
  std::string train_subsets;
  std::string train_method;
  std::size_t train_k = 0;
  std::string train_classifier = "treeA";
  std::string train_scheme = "scaled";
  std::string train_dir = ".";
  SeedOption train_seed;
  auto* train = app.add_subcommand("train", "Train a decision-tree selector for one subset and export it");
  train->add_option("--input", train_input, "Training CSV")->required();
  train->add_option("--subsets", train_subsets, "Subsets CSV from `select`")->required();
  train->add_option("--method", train_method, "Subset method to use")->required()->check(CLI::IsMember(kMethodNames));
  train->add_option("--k", train_k, "Subset k_requested to use")->required();
  train->add_option("--classifier", train_classifier, "Tree preset")->check(CLI::IsMember({"treeA", "treeB", "treeC"}));
  train->add_option("--scheme", train_scheme, "Scheme tag for the output name")->check(CLI::IsMember(kSchemeNames));
  train->add_option("--seed", train_seed.flag, "Seed (falls back to KP_SEED)");
  train->add_option("--output-dir", train_dir, "Directory for the .kptree file");

  // evaluate
  std::string eval_input;
  std::string eval_test;
  std::string eval_subsets;
  std::string eval_output;
  std::string eval_per_row;
  std::string eval_scheme = "scaled";
  std::vector<std::string> eval_classifiers = kClassifierNames;
  double eval_fraction = 0.2;
  SeedOption eval_seed;
  auto* eval = app.add_subcommand("evaluate", "Score subsets and classifiers on held-out data");
  eval->add_option("--input", eval_input, "Training CSV (or full dataset without --test)")->required();
  eval->add_option("--test", eval_test, "Test CSV; if absent, --input is split");
  eval->add_option("--subsets", eval_subsets, "Subsets CSV from `select`")->required();
  eval->add_option("--scheme", eval_scheme, "Scheme tag for the report")->check(CLI::IsMember(kSchemeNames));
  eval->add_option("--classifier", eval_classifiers, "Classifiers")->delimiter(',')->check(CLI::IsMember(kClassifierNames));
  eval->add_option("--test-fraction", eval_fraction, "Held-out fraction when splitting")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--seed", eval_seed.flag, "Seed (falls back to KP_SEED)");
  eval->add_option("--output", eval_output, "Report CSV (default stdout)");
  eval->add_option("--per-row", eval_per_row, "Per-row detail CSV");

  // codegen
  std::string cg_model;
  std::string cg_output;
  std::string cg_function = EmitTemplate{}.function_name;
  auto* cg = app.add_subcommand("codegen", "Emit a .kptree model as nested conditionals");
  cg->add_option("--model", cg_model, "Model document")->required();
  cg->add_option("--function-name", cg_function, "Emitted function name");
  cg->add_option("--output", cg_output, "Source file (default stdout)");

  // run
  std::string run_config;
  std::optional<std::string> run_input;
  std::optional<std::string> run_dir;
  std::vector<std::string> run_schemes;
  std::vector<std::string> run_methods;
  std::vector<std::string> run_k;
  std::vector<std::string> run_classifiers;
  std::optional<double> run_fraction;
  std::optional<std::uint64_t> run_seed;
  std::optional<int> run_jobs;
  std::optional<std::size_t> run_problems;
  auto* run = app.add_subcommand("run", "Full pipeline; flags override the config file");
  run->add_option("--config", run_config, "JSON config file");
  run->add_option("--input", run_input, "Benchmark CSV (default: synthetic data)");
  run->add_option("--output-dir", run_dir, "Output directory");
  run->add_option("--scheme", run_schemes, "Normalization schemes")->delimiter(',')->check(CLI::IsMember(kSchemeNames));
  run->add_option("--method", run_methods, "Selection methods")->delimiter(',')->check(CLI::IsMember(kMethodNames));
  run->add_option("--k", run_k, "Subset sizes, e.g. 4,8 or 4-15")->delimiter(',');
  run->add_option("--classifier", run_classifiers, "Classifiers")->delimiter(',')->check(CLI::IsMember(kClassifierNames));
  run->add_option("--test-fraction", run_fraction, "Held-out fraction")->check(CLI::Range(0.0, 1.0));
  run->add_option("--seed", run_seed, "Seed (falls back to the config file, then KP_SEED)");
  run->add_option("--jobs", run_jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--synth-problems", run_problems, "Synthetic problem count")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) {
      const PerfMatrix pm = read_benchmark_csv(ingest_input);
      std::cout << "rows=" << pm.rows() << " cols=" << pm.cols() << " measurements=" << pm.rows() * pm.cols()
                << '\n';
      return kExitOk;
    }
    if (*synth) {
      PipelineConfig cfg = PipelineConfig::defaults();
      cfg.synth_problems = synth_problems;
      cfg.synth.noise_sigma = synth_noise;
      cfg.seed = synth_seed.resolve();
      emit(synth_output, write_benchmark_csv(load_dataset(cfg)));
      return kExitOk;
    }
    if (*pca) {
      const NormKind kind = parse_norm_kind(pca_scheme);
      const PerfMatrix pm = read_benchmark_csv(pca_input);
      std::ostringstream out;
      write_variance_csv(out, variance_report(fit_pca(normalize(pm, NormScheme{kind}))), kind);
      emit(pca_output, out.str());
      return kExitOk;
    }
    if (*sel) {
      const PerfMatrix pm = read_benchmark_csv(select_input);
      const Selector selector(normalize(pm, NormScheme{parse_norm_kind(select_scheme)}));
      const std::uint64_t seed = select_seed.resolve();
      std::vector<ConfigSubset> subsets;
      for (SelectMethod m : parse_all<SelectMethod>(select_methods, parse_select_method)) {
        for (std::size_t k : expand_k(select_k)) subsets.push_back(selector.select(m, k, seed));
      }
      std::ostringstream out;
      write_subsets_csv(out, subsets);
      emit(select_output, out.str());
      return kExitOk;
    }
    if (*train) {
      const PerfMatrix pm = read_benchmark_csv(train_input);
      const auto subsets = parse_subsets_csv(read_file(train_subsets));
      const ClassifierKind kind = parse_classifier_kind(train_classifier);
      for (const auto& s : subsets) {
        if (s.method != train_method || s.k_requested != train_k) continue;
        const auto labels = label_best_in_subset(normalize(pm, NormScheme{}), s);
        const TrainedClassifier clf(kind, features_of(pm.problems()), labels, train_seed.resolve());
        const std::string stem = model_stem(parse_norm_kind(train_scheme), s.method, s.k_requested, kind);
        const std::filesystem::path path = std::filesystem::path(train_dir) / (stem + ".kptree");
        write_file_atomic(path, export_model(*clf.tree(), s, pm.configs()));
        std::cout << path.string() << '\n';
        return kExitOk;
      }
      throw InvalidArgument("no subset with method " + train_method + " and k " + std::to_string(train_k));
    }
    if (*eval) {
      const std::uint64_t seed = eval_seed.resolve();
      PerfMatrix train_pm = read_benchmark_csv(eval_input);
      std::optional<PerfMatrix> test_pm;
      if (!eval_test.empty()) {
        test_pm = read_benchmark_csv(eval_test);
      } else {
        SplitResult parts = split(train_pm, SplitSpec{eval_fraction, seed});
        train_pm = std::move(parts.train);
        test_pm = std::move(parts.test);
      }
      const auto subsets = parse_subsets_csv(read_file(eval_subsets));
      const auto kinds = parse_all<ClassifierKind>(eval_classifiers, parse_classifier_kind);
      std::vector<EvalReport> reports;
      for (const auto& s : subsets) {
        for (auto& scored : score_subset(train_pm, *test_pm, s, kinds, eval_scheme, seed)) {
          reports.push_back(std::move(scored.report));
        }
      }
      std::ostringstream out;
      write_eval_csv(out, reports);
      emit(eval_output, out.str());
      if (!eval_per_row.empty()) {
        std::ostringstream rows;
        write_per_row_csv(rows, reports);
        write_file_atomic(eval_per_row, rows.str());
      }
      return kExitOk;
    }
    if (*cg) {
      const ImportedModel model = import_model(read_file(cg_model));
      EmitTemplate tmpl = EmitTemplate::c_family();
      tmpl.function_name = cg_function;
      emit(cg_output, emit_nested_if(model.tree, model.subset, model.configs, tmpl));
      return kExitOk;
    }
    if (*run) {
      PipelineConfig cfg = PipelineConfig::defaults();
      cfg.seed = env_seed();
      if (!run_config.empty()) cfg = config_from_json(read_file(run_config), cfg);
      if (run_input) cfg.input = *run_input;
      if (run_dir) cfg.output_dir = *run_dir;
      if (!run_schemes.empty()) cfg.schemes = parse_all<NormKind>(run_schemes, parse_norm_kind);
      if (!run_methods.empty()) cfg.methods = parse_all<SelectMethod>(run_methods, parse_select_method);
      if (!run_k.empty()) cfg.k_values = expand_k(run_k);
      if (!run_classifiers.empty()) cfg.classifiers = parse_all<ClassifierKind>(run_classifiers, parse_classifier_kind);
      if (run_fraction) cfg.test_fraction = *run_fraction;
      if (run_seed) cfg.seed = *run_seed;
      if (run_jobs) cfg.jobs = *run_jobs;
      if (run_problems) cfg.synth_problems = *run_problems;
      return run_pipeline(cfg, std::cerr);
    }
  } catch (const DataError& e) {
    std::cerr << "kptune: " << e.what() << '\n';
    return kExitData;
  } catch (const InvalidArgument& e) {
    std::cerr << "kptune: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "kptune: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
