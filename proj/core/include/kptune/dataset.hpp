#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace kptune {

/// One point in the tunable-parameter space of a tiled matrix-multiply kernel.
/// Each work item accumulates a tile_rows x tile_acc by tile_acc x tile_cols
/// product into a tile_rows x tile_cols output tile.
struct KernelConfig {
  int tile_rows = 1;
  int tile_acc = 1;
  int tile_cols = 1;
  int wg_rows = 1;
  int wg_cols = 1;

  auto operator<=>(const KernelConfig&) const = default;
};

std::string to_string(const KernelConfig& c);
std::ostream& operator<<(std::ostream& os, const KernelConfig& c);

/// Matrix-multiply input dimensions. All strictly positive.
struct ProblemSize {
  std::int64_t m = 1;
  std::int64_t k = 1;
  std::int64_t n = 1;
  std::int64_t batch = 1;

  auto operator<=>(const ProblemSize&) const = default;
};

std::string to_string(const ProblemSize& p);
std::ostream& operator<<(std::ostream& os, const ProblemSize& p);

using WorkGroupPair = std::pair<int, int>;

/// Tile sizes usable as vector widths: {1, 2, 4, 8}.
std::vector<int> default_tile_set();

/// The ten (rows, cols) work-group shapes accepted by the device drivers in
/// the reference study.
std::vector<WorkGroupPair> default_wg_pairs();

/// Cartesian product tile_set^3 x wg_pairs, ordered lexicographically by
/// (R, A, C) and then by position in `wg_pairs`. The tile set is sorted and
/// deduplicated first.
/// Throws InvalidArgument on an empty tile set, empty pair list or duplicate
/// pairs.
std::vector<KernelConfig> enumerate_configs(std::span<const int> tile_set,
                                            std::span<const WorkGroupPair> wg_pairs);

/// Dense problems x configs table of achieved Gflops/s.
///
/// Immutable after construction. The constructor enforces: every value finite
/// and strictly positive, no duplicate problems, no duplicate configs, shape
/// matching the two lists.
class PerfMatrix {
 public:
  PerfMatrix(std::vector<ProblemSize> problems, std::vector<KernelConfig> configs,
             Eigen::MatrixXd values);

  const std::vector<ProblemSize>& problems() const noexcept { return problems_; }
  const std::vector<KernelConfig>& configs() const noexcept { return configs_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }
  double value(Eigen::Index row, Eigen::Index col) const { return values_(row, col); }

  /// Row maxima over all configs, i.e. the per-problem optimum.
  Eigen::VectorXd row_max() const { return values_.rowwise().maxCoeff(); }

  /// New matrix holding the given rows in the given order; columns unchanged.
  PerfMatrix select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const PerfMatrix& a, const PerfMatrix& b);

 private:
  std::vector<ProblemSize> problems_;
  std::vector<KernelConfig> configs_;
  Eigen::MatrixXd values_;
};

// --- CSV ingestion -------------------------------------------------------

inline constexpr std::string_view kBenchmarkCsvHeader =
    "m,k,n,batch,tile_rows,tile_acc,tile_cols,wg_rows,wg_cols,gflops";

/// Parses benchmark output, one measurement per row. Rows and columns of the
/// result follow first appearance in the file.
///
/// Throws ParseError (malformed header or row, with its line number),
/// ValueError (non-positive or non-finite gflops, non-positive dimension, a
/// pair measured twice), IncompleteGridError (a (problem, config) pair without
/// a measurement).
PerfMatrix parse_benchmark_csv(std::istream& in);
PerfMatrix parse_benchmark_csv(std::string_view text);
PerfMatrix read_benchmark_csv(const std::string& path);

/// Problem-major serialization. Values are written in shortest round-trip
/// form, so parse_benchmark_csv(write_benchmark_csv(pm)) == pm bit-exactly.
void write_benchmark_csv(std::ostream& out, const PerfMatrix& pm);
std::string write_benchmark_csv(const PerfMatrix& pm);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

// --- Train/test split ----------------------------------------------------

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SplitResult {
  PerfMatrix train;
  PerfMatrix test;
  std::vector<std::size_t> train_rows;  // indices into the source matrix
  std::vector<std::size_t> test_rows;
};

/// Seeded uniform shuffle of row indices; the first ceil(test_fraction * rows)
/// become the test set. Throws InvalidArgument for fewer than two rows, a
/// fraction outside (0, 1), or a split that would leave either side empty.
SplitResult split(const PerfMatrix& pm, const SplitSpec& spec);

// --- Synthetic data ------------------------------------------------------

/// Parameters of the analytic throughput model used as a stand-in for
/// hardware benchmark runs.
struct SynthModel {
  std::int64_t device_parallelism = 16384;
  int reg_budget = 48;
  double peak = 3000.0;
  double noise_sigma = 0.03;
  std::uint64_t seed = 0;
};

/// value = peak * utilization * reuse * pressure * (1 + eps), clamped to at
/// least peak * 1e-4. See README for the factor definitions.
PerfMatrix synth_generate(const SynthModel& model, std::span<const ProblemSize> problems,
                          std::span<const KernelConfig> configs);

/// Distinct problem sizes with log-uniform m, k, n in [27, 12544] and batch
/// drawn from {1, 2, 4, ..., 64}.
std::vector<ProblemSize> sample_problem_sizes(std::size_t count, std::uint64_t seed);

/// Planted-regime generator: problems fall into `regimes` bands of m, and
/// every problem in band r has the same configuration as its unique optimum.
/// Non-winning configs score a regime-specific profile in [0.2, 0.8] of the
/// winner, perturbed per row by up to +-jitter (relative).
struct PlantedModel {
  int regimes = 4;
  int rows_per_regime = 40;
  double peak = 3000.0;
  double jitter = 0.05;
  std::uint64_t seed = 0;
};

struct PlantedData {
  PerfMatrix perf;
  std::vector<int> regime;            // per row
  std::vector<std::size_t> winners;   // config column per regime
};

PlantedData synth_planted(const PlantedModel& model, std::span<const KernelConfig> configs);

}  // namespace kptune
