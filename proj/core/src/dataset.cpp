#include "kptune/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "kptune/error.hpp"
#include "random.hpp"

namespace kptune {

std::string to_string(const KernelConfig& c) {
  std::ostringstream os;
  os << c;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const KernelConfig& c) {
  return os << "tiles(" << c.tile_rows << "," << c.tile_acc << "," << c.tile_cols << ") wg("
            << c.wg_rows << "," << c.wg_cols << ")";
}

std::string to_string(const ProblemSize& p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const ProblemSize& p) {
  return os << "m=" << p.m << " k=" << p.k << " n=" << p.n << " batch=" << p.batch;
}

std::vector<int> default_tile_set() { return {1, 2, 4, 8}; }

std::vector<WorkGroupPair> default_wg_pairs() {
  return {{1, 64}, {1, 128}, {8, 8},  {8, 16}, {8, 32},
          {16, 8}, {16, 16}, {32, 8}, {64, 1}, {128, 1}};
}

std::vector<KernelConfig> enumerate_configs(std::span<const int> tile_set,
                                            std::span<const WorkGroupPair> wg_pairs) {
  if (tile_set.empty()) throw InvalidArgument("enumerate_configs: empty tile set");
  if (wg_pairs.empty()) throw InvalidArgument("enumerate_configs: empty work-group pair list");

  std::vector<int> tiles(tile_set.begin(), tile_set.end());
  std::sort(tiles.begin(), tiles.end());
  tiles.erase(std::unique(tiles.begin(), tiles.end()), tiles.end());
  if (tiles.front() < 1) throw InvalidArgument("enumerate_configs: tile sizes must be >= 1");

  std::set<WorkGroupPair> seen;
  for (const auto& wg : wg_pairs) {
    if (wg.first < 1 || wg.second < 1) {
      throw InvalidArgument("enumerate_configs: work-group sizes must be >= 1");
    }
    if (!seen.insert(wg).second) {
      throw InvalidArgument("enumerate_configs: duplicate work-group pair (" +
                            std::to_string(wg.first) + "," + std::to_string(wg.second) + ")");
    }
  }

  std::vector<KernelConfig> out;
  out.reserve(tiles.size() * tiles.size() * tiles.size() * wg_pairs.size());
  for (int r : tiles)
    for (int a : tiles)
      for (int c : tiles)
        for (const auto& [wr, wc] : wg_pairs) out.push_back({r, a, c, wr, wc});
  return out;
}

PerfMatrix::PerfMatrix(std::vector<ProblemSize> problems, std::vector<KernelConfig> configs,
                       Eigen::MatrixXd values)
    : problems_(std::move(problems)), configs_(std::move(configs)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != problems_.size() ||
      static_cast<std::size_t>(values_.cols()) != configs_.size()) {
    throw InvalidArgument("PerfMatrix: value shape does not match problem/config lists");
  }
  if (problems_.empty() || configs_.empty()) {
    throw InvalidArgument("PerfMatrix: needs at least one problem and one config");
  }
  for (const auto& p : problems_) {
    if (p.m < 1 || p.k < 1 || p.n < 1 || p.batch < 1) {
      throw InvalidArgument("PerfMatrix: non-positive dimension in " + to_string(p));
    }
  }
  {
    std::vector<ProblemSize> sorted = problems_;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) throw InvalidArgument("PerfMatrix: duplicate problem " + to_string(*dup));
  }
  {
    std::vector<KernelConfig> sorted = configs_;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) throw InvalidArgument("PerfMatrix: duplicate config " + to_string(*dup));
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      const double v = values_(i, j);
      if (!std::isfinite(v) || v <= 0.0) {
        throw InvalidArgument("PerfMatrix: value at (" + std::to_string(i) + "," +
                              std::to_string(j) + ") must be finite and > 0");
      }
    }
  }
}

PerfMatrix PerfMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<ProblemSize> problems;
  problems.reserve(rows.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= problems_.size()) throw InvalidArgument("select_rows: row index out of range");
    problems.push_back(problems_[rows[i]]);
    values.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(rows[i]));
  }
  return PerfMatrix(std::move(problems), configs_, std::move(values));
}

bool operator==(const PerfMatrix& a, const PerfMatrix& b) {
  return a.problems_ == b.problems_ && a.configs_ == b.configs_ &&
         a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
         a.values_ == b.values_;
}

SplitResult split(const PerfMatrix& pm, const SplitSpec& spec) {
  const auto rows = static_cast<std::size_t>(pm.rows());
  if (rows < 2) throw InvalidArgument("split: need at least 2 problem rows");
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw InvalidArgument("split: test_fraction must be in (0, 1)");
  }
  // The small slack keeps exact products such as 0.2 * 300 from rounding up.
  const auto n_test = static_cast<std::size_t>(
      std::ceil(spec.test_fraction * static_cast<double>(rows) - 1e-9));
  if (n_test == 0 || n_test >= rows) {
    throw InvalidArgument("split: test_fraction leaves an empty train or test set");
  }

  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  detail::Rng rng(spec.seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  PerfMatrix train = pm.select_rows(train_rows);
  PerfMatrix test = pm.select_rows(test_rows);
  return SplitResult{std::move(train), std::move(test), std::move(train_rows), std::move(test_rows)};
}

}  // namespace kptune
