#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "kptune/dataset.hpp"
#include "kptune/error.hpp"
#include "random.hpp"

namespace kptune {
namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

double raw_reuse(const KernelConfig& c) {
  const double rc = static_cast<double>(c.tile_rows) * c.tile_cols;
  return rc / (rc + c.tile_rows + c.tile_cols);
}

double register_pressure(const KernelConfig& c, int reg_budget) {
  const double regs = static_cast<double>(c.tile_rows) * c.tile_acc +
                      static_cast<double>(c.tile_acc) * c.tile_cols +
                      static_cast<double>(c.tile_rows) * c.tile_cols;
  return regs <= reg_budget ? 1.0 : reg_budget / regs;
}

double utilization(const ProblemSize& p, const KernelConfig& c, std::int64_t device_parallelism) {
  const std::int64_t wg_r = c.wg_rows;
  const std::int64_t wg_c = c.wg_cols;
  const double work_items = static_cast<double>(p.batch) *
                            static_cast<double>(ceil_div(p.m, c.tile_rows * wg_r)) *
                            static_cast<double>(ceil_div(p.n, c.tile_cols * wg_c)) *
                            static_cast<double>(wg_r * wg_c);
  return std::min(1.0, work_items / static_cast<double>(device_parallelism));
}

std::int64_t log_uniform_int(detail::Rng& rng, double lo, double hi) {
  return static_cast<std::int64_t>(std::llround(std::exp(rng.uniform(std::log(lo), std::log(hi)))));
}

}  // namespace

PerfMatrix synth_generate(const SynthModel& model, std::span<const ProblemSize> problems,
                          std::span<const KernelConfig> configs) {
  if (problems.empty() || configs.empty()) {
    throw InvalidArgument("synth_generate: problem and config lists must be non-empty");
  }
  if (!(model.peak > 0.0) || !std::isfinite(model.peak)) {
    throw InvalidArgument("synth_generate: peak must be > 0");
  }
  if (!(model.noise_sigma >= 0.0 && model.noise_sigma < 0.5)) {
    throw InvalidArgument("synth_generate: noise_sigma must be in [0, 0.5)");
  }
  if (model.device_parallelism < 1 || model.reg_budget < 1) {
    throw InvalidArgument("synth_generate: device_parallelism and reg_budget must be >= 1");
  }

  std::vector<double> reuse(configs.size());
  std::vector<double> pressure(configs.size());
  double max_reuse = 0.0;
  for (std::size_t j = 0; j < configs.size(); ++j) {
    reuse[j] = raw_reuse(configs[j]);
    max_reuse = std::max(max_reuse, reuse[j]);
    pressure[j] = register_pressure(configs[j], model.reg_budget);
  }
  for (double& r : reuse) r /= max_reuse;

  detail::Rng rng(model.seed);
  const double floor = model.peak * 1e-4;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(problems.size()),
                         static_cast<Eigen::Index>(configs.size()));
  for (std::size_t i = 0; i < problems.size(); ++i) {
    for (std::size_t j = 0; j < configs.size(); ++j) {
      const double eps = model.noise_sigma > 0.0 ? model.noise_sigma * rng.normal() : 0.0;
      const double v = model.peak * utilization(problems[i], configs[j], model.device_parallelism) *
                       reuse[j] * pressure[j] * (1.0 + eps);
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::max(floor, v);
    }
  }
  return PerfMatrix(std::vector<ProblemSize>(problems.begin(), problems.end()),
                    std::vector<KernelConfig>(configs.begin(), configs.end()), std::move(values));
}

std::vector<ProblemSize> sample_problem_sizes(std::size_t count, std::uint64_t seed) {
  detail::Rng rng(seed);
  std::set<ProblemSize> seen;
  std::vector<ProblemSize> out;
  out.reserve(count);
  while (out.size() < count) {
    ProblemSize p;
    p.m = log_uniform_int(rng, 27.0, 12544.0);
    p.k = log_uniform_int(rng, 27.0, 12544.0);
    p.n = log_uniform_int(rng, 27.0, 12544.0);
    p.batch = std::int64_t{1} << rng.index(7);
    if (seen.insert(p).second) out.push_back(p);
  }
  return out;
}

PlantedData synth_planted(const PlantedModel& model, std::span<const KernelConfig> configs) {
  if (model.regimes < 1 || model.rows_per_regime < 1) {
    throw InvalidArgument("synth_planted: regimes and rows_per_regime must be >= 1");
  }
  if (static_cast<std::size_t>(model.regimes) > configs.size()) {
    throw InvalidArgument("synth_planted: more regimes than configs");
  }
  if (model.regimes > 12) throw InvalidArgument("synth_planted: at most 12 regimes");
  if (!(model.jitter >= 0.0 && model.jitter <= 0.2)) {
    throw InvalidArgument("synth_planted: jitter must be in [0, 0.2]");
  }
  if (!(model.peak > 0.0)) throw InvalidArgument("synth_planted: peak must be > 0");

  detail::Rng rng(model.seed);
  const std::size_t n_cfg = configs.size();
  const auto n_reg = static_cast<std::size_t>(model.regimes);

  std::vector<std::size_t> order(n_cfg);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> winners(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_reg));

  Eigen::MatrixXd profile(static_cast<Eigen::Index>(n_reg), static_cast<Eigen::Index>(n_cfg));
  for (Eigen::Index r = 0; r < profile.rows(); ++r)
    for (Eigen::Index c = 0; c < profile.cols(); ++c) profile(r, c) = rng.uniform(0.2, 0.8);

  // Regime r owns m in [2^(4+2r), 2^(5+2r)); the gaps between bands keep the
  // regimes separable by a single threshold on log2(m).
  std::set<ProblemSize> seen;
  std::vector<ProblemSize> problems;
  std::vector<int> regime;
  const std::size_t total = n_reg * static_cast<std::size_t>(model.rows_per_regime);
  problems.reserve(total);
  for (int r = 0; r < model.regimes; ++r) {
    const std::int64_t m_lo = std::int64_t{1} << (4 + 2 * r);
    int made = 0;
    while (made < model.rows_per_regime) {
      ProblemSize p;
      p.m = m_lo + static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(m_lo)));
      p.k = log_uniform_int(rng, 27.0, 4096.0);
      p.n = log_uniform_int(rng, 27.0, 4096.0);
      p.batch = std::int64_t{1} << rng.index(6);
      if (!seen.insert(p).second) continue;
      problems.push_back(p);
      regime.push_back(r);
      ++made;
    }
  }

  Eigen::MatrixXd values(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(n_cfg));
  for (std::size_t i = 0; i < total; ++i) {
    const auto r = static_cast<Eigen::Index>(regime[i]);
    const double scale = model.peak * rng.uniform(0.3, 1.0);
    for (std::size_t c = 0; c < n_cfg; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      double v = scale;
      if (c != winners[static_cast<std::size_t>(r)]) {
        v = scale * profile(r, ci) * (1.0 + model.jitter * rng.uniform(-1.0, 1.0));
      }
      values(static_cast<Eigen::Index>(i), ci) = v;
    }
  }

  return PlantedData{PerfMatrix(std::move(problems),
                                std::vector<KernelConfig>(configs.begin(), configs.end()),
                                std::move(values)),
                     std::move(regime), std::move(winners)};
}

}  // namespace kptune
