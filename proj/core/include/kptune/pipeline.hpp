#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kptune/classify.hpp"
#include "kptune/dataset.hpp"
#include "kptune/evaluate.hpp"
#include "kptune/normalize.hpp"
#include "kptune/pca.hpp"
#include "kptune/select.hpp"

namespace kptune {

struct PipelineConfig {
  std::string input;  // benchmark CSV; empty means synthetic data
  std::size_t synth_problems = 300;
  SynthModel synth;  // synth.seed is ignored; `seed` drives generation

  std::vector<NormKind> schemes;
  double cutoff = 0.9;
  double sig_center = 0.85;
  double sig_steepness = 50.0;

  std::vector<SelectMethod> methods;
  std::vector<std::size_t> k_values;
  std::vector<ClassifierKind> classifiers;
  double test_fraction = 0.2;
  std::string output_dir = "kptune_out";
  std::uint64_t seed = 0;
  int jobs = 1;

  /// Full default grid: k 4..15, every scheme, method and classifier.
  static PipelineConfig defaults();

  NormScheme scheme(NormKind kind) const;
  /// Throws InvalidArgument on empty grids or out-of-range values.
  void validate() const;
};

/// Canonical JSON with every field spelled out.
std::string config_to_json(const PipelineConfig& cfg);
/// Fields absent from `text` keep their value in `base`. Throws
/// InvalidArgument on malformed JSON or unknown keys and names.
PipelineConfig config_from_json(std::string_view text, const PipelineConfig& base = PipelineConfig::defaults());

/// The input CSV, or synthetic data over the 640-config space.
PerfMatrix load_dataset(const PipelineConfig& cfg);

/// `component,explained,cumulative` preceded by a `# scheme=<name>` line.
void write_variance_csv(std::ostream& out, const VarianceReport& report, NormKind scheme);

/// `method,k_requested,k_actual,config_indices`; indices joined by `;`.
void write_subsets_csv(std::ostream& out, std::span<const ConfigSubset> subsets);
std::vector<ConfigSubset> parse_subsets_csv(std::string_view text);

/// Writes `contents` to a temporary sibling, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Stem used for per-model artifacts, e.g. `scaled_kmeans_k8_treeA`.
std::string model_stem(NormKind scheme, std::string_view method, std::size_t k, ClassifierKind kind);

/// Exit codes shared by the pipeline and the CLI.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3 };

/// Runs every stage and writes into cfg.output_dir:
///   resolved_config.json, train.csv, test.csv, eval_report.csv,
///   pca_variance_<scheme>.csv, subsets_<scheme>.csv, per_row_<scheme>.csv,
///   models/<stem>.kptree and models/<stem>.c for the tree classifiers.
/// On failure writes FAILED naming the stage, logs the diagnostic to `log`
/// and returns kExitData or kExitInternal.
int run_pipeline(const PipelineConfig& cfg, std::ostream& log);

}  // namespace kptune
