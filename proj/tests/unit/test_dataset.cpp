#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "kptune/dataset.hpp"
#include "kptune/error.hpp"
#include "oracles.hpp"

namespace kptune {
namespace {

constexpr std::string_view kHeader = "m,k,n,batch,tile_rows,tile_acc,tile_cols,wg_rows,wg_cols,gflops\n";

TEST(EnumerateConfigs, DefaultSpaceHas640Configs) {
  const auto configs = enumerate_configs(default_tile_set(), default_wg_pairs());
  EXPECT_EQ(configs.size(), 640u);
  std::set<KernelConfig> unique(configs.begin(), configs.end());
  EXPECT_EQ(unique.size(), configs.size());
}

TEST(EnumerateConfigs, SingletonSpace) {
  const std::vector<int> tiles{1};
  const std::vector<WorkGroupPair> pairs{{8, 8}};
  const auto configs = enumerate_configs(tiles, pairs);
  ASSERT_EQ(configs.size(), 1u);
  EXPECT_EQ(configs[0], (KernelConfig{1, 1, 1, 8, 8}));
}

TEST(EnumerateConfigs, LexicographicOrder) {
  const std::vector<int> tiles{1, 2};
  const std::vector<WorkGroupPair> pairs{{8, 8}, {16, 8}};
  const auto configs = enumerate_configs(tiles, pairs);
  ASSERT_EQ(configs.size(), 16u);
  EXPECT_EQ(configs.front(), (KernelConfig{1, 1, 1, 8, 8}));
  EXPECT_EQ(configs[1], (KernelConfig{1, 1, 1, 16, 8}));
  EXPECT_EQ(configs[2], (KernelConfig{1, 1, 2, 8, 8}));
  EXPECT_EQ(configs.back(), (KernelConfig{2, 2, 2, 16, 8}));
}

TEST(EnumerateConfigs, LengthIsCubeTimesPairs) {
  const std::vector<WorkGroupPair> pairs{{1, 2}, {3, 4}, {5, 6}};
  for (int n = 1; n <= 4; ++n) {
    std::vector<int> tiles;
    for (int t = 0; t < n; ++t) tiles.push_back(1 << t);
    EXPECT_EQ(enumerate_configs(tiles, pairs).size(), static_cast<std::size_t>(n * n * n * 3));
  }
}

TEST(EnumerateConfigs, Errors) {
  const std::vector<int> tiles{1};
  const std::vector<int> no_tiles;
  const std::vector<WorkGroupPair> pairs{{8, 8}};
  const std::vector<WorkGroupPair> no_pairs;
  const std::vector<WorkGroupPair> dup_pairs{{8, 8}, {8, 8}};
  EXPECT_THROW(enumerate_configs(no_tiles, pairs), InvalidArgument);
  EXPECT_THROW(enumerate_configs(tiles, no_pairs), InvalidArgument);
  EXPECT_THROW(enumerate_configs(tiles, dup_pairs), InvalidArgument);
}

TEST(PerfMatrixType, RejectsInvalidValues) {
  const std::vector<ProblemSize> p{{1, 1, 1, 1}};
  const std::vector<KernelConfig> c{{1, 1, 1, 1, 1}, {2, 1, 1, 1, 1}};
  Eigen::MatrixXd ok(1, 2);
  ok << 1.0, 2.0;
  EXPECT_NO_THROW(PerfMatrix(p, c, ok));
  Eigen::MatrixXd zero(1, 2);
  zero << 0.0, 2.0;
  EXPECT_THROW(PerfMatrix(p, c, zero), InvalidArgument);
  Eigen::MatrixXd nan(1, 2);
  nan << std::nan(""), 2.0;
  EXPECT_THROW(PerfMatrix(p, c, nan), InvalidArgument);
  EXPECT_THROW(PerfMatrix(p, c, Eigen::MatrixXd::Ones(2, 2)), InvalidArgument);
  const std::vector<KernelConfig> dup{{1, 1, 1, 1, 1}, {1, 1, 1, 1, 1}};
  EXPECT_THROW(PerfMatrix(p, dup, ok), InvalidArgument);
}

TEST(ParseCsv, MinimalGrid) {
  const std::string text = std::string(kHeader) + "64,64,64,1,1,1,1,8,8,10.0\n64,64,64,1,2,1,1,8,8,20.0\n";
  const PerfMatrix pm = parse_benchmark_csv(text);
  EXPECT_EQ(pm.rows(), 1);
  EXPECT_EQ(pm.cols(), 2);
  EXPECT_EQ(pm.value(0, 0), 10.0);
  EXPECT_EQ(pm.value(0, 1), 20.0);
}

TEST(ParseCsv, NoTrailingNewlineAndCrLf) {
  const std::string text = "m,k,n,batch,tile_rows,tile_acc,tile_cols,wg_rows,wg_cols,gflops\r\n"
                           "64,64,64,1,1,1,1,8,8,10.0\r\n64,64,64,1,2,1,1,8,8,20.0";
  EXPECT_EQ(parse_benchmark_csv(text).cols(), 2);
}

TEST(ParseCsv, FirstAppearanceOrder) {
  const std::string text = std::string(kHeader) +
                           "9,9,9,1,2,1,1,8,8,1\n9,9,9,1,1,1,1,8,8,2\n"
                           "5,5,5,1,1,1,1,8,8,3\n5,5,5,1,2,1,1,8,8,4\n";
  const PerfMatrix pm = parse_benchmark_csv(text);
  EXPECT_EQ(pm.problems()[0], (ProblemSize{9, 9, 9, 1}));
  EXPECT_EQ(pm.configs()[0], (KernelConfig{2, 1, 1, 8, 8}));
  EXPECT_EQ(pm.value(1, 0), 4.0);
  EXPECT_EQ(pm.value(1, 1), 3.0);
}

TEST(ParseCsv, IncompleteGridNamesMissingPair) {
  const std::string text = std::string(kHeader) +
                           "1,1,1,1,1,1,1,8,8,1\n1,1,1,1,2,1,1,8,8,1\n2,2,2,1,1,1,1,8,8,1\n";
  try {
    parse_benchmark_csv(text);
    FAIL() << "expected IncompleteGridError";
  } catch (const IncompleteGridError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("m=2 k=2 n=2 batch=1"), std::string::npos) << what;
    EXPECT_NE(what.find("tiles(2,1,1) wg(8,8)"), std::string::npos) << what;
  }
}

TEST(ParseCsv, ZeroGflopsIsValueErrorWithLine) {
  const std::string text = std::string(kHeader) + "1,1,1,1,1,1,1,8,8,5\n1,1,1,1,2,1,1,8,8,0\n";
  try {
    parse_benchmark_csv(text);
    FAIL() << "expected ValueError";
  } catch (const ValueError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseCsv, MalformedRowIsParseErrorWithLine) {
  const std::string text = std::string(kHeader) + "1,1,1,1,1,1,1,8,8,5\n1,1,1,1,x,1,1,8,8,5\n";
  try {
    parse_benchmark_csv(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_benchmark_csv(std::string(kHeader) + "1,1,1,1,1,1,1,8,8\n"), ParseError);
  EXPECT_THROW(parse_benchmark_csv(std::string(kHeader) + "1,1,1,1,1,1,1,8,8,5,6\n"), ParseError);
  EXPECT_THROW(parse_benchmark_csv(std::string(kHeader) + "1,1,1,1,1,1,1,8,8,abc\n"), ParseError);
}

TEST(ParseCsv, HeaderAndEmptyFileErrors) {
  EXPECT_THROW(parse_benchmark_csv(std::string_view("")), ParseError);
  EXPECT_THROW(parse_benchmark_csv(std::string_view("m,k,n\n1,2,3\n")), ParseError);
  EXPECT_THROW(parse_benchmark_csv(kHeader), ParseError);
}

TEST(ParseCsv, DuplicateMeasurementAndBadDimensions) {
  EXPECT_THROW(parse_benchmark_csv(std::string(kHeader) + "1,1,1,1,1,1,1,8,8,5\n1,1,1,1,1,1,1,8,8,6\n"),
               ValueError);
  EXPECT_THROW(parse_benchmark_csv(std::string(kHeader) + "0,1,1,1,1,1,1,8,8,5\n"), ValueError);
  EXPECT_THROW(parse_benchmark_csv(std::string(kHeader) + "1,1,1,1,1,1,1,8,8,-5\n"), ValueError);
  EXPECT_THROW(parse_benchmark_csv(std::string(kHeader) + "1,1,1,1,1,1,1,8,8,inf\n"), ValueError);
}

TEST(ParseCsv, MissingFileIsDataError) {
  EXPECT_THROW(read_benchmark_csv("/nonexistent/bench.csv"), DataError);
}

TEST(CsvRoundTrip, BitExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PerfMatrix pm = oracle::random_perf_matrix(7, 9, seed);
    const PerfMatrix back = parse_benchmark_csv(write_benchmark_csv(pm));
    EXPECT_TRUE(back == pm);
  }
  const std::vector<ProblemSize> p{{3, 5, 7, 2}};
  const std::vector<KernelConfig> c{{1, 1, 1, 8, 8}};
  Eigen::MatrixXd v(1, 1);
  v << 0.1 + 0.2;  // not exactly representable as a short decimal
  const PerfMatrix pm(p, c, v);
  EXPECT_TRUE(parse_benchmark_csv(write_benchmark_csv(pm)) == pm);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(5.1), "5.1");
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(3.0), "3");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Split, TenRowsGivesEightTwo) {
  const PerfMatrix pm = oracle::random_perf_matrix(10, 3, 1);
  const SplitResult r = split(pm, SplitSpec{0.2, 7});
  EXPECT_EQ(r.train.rows(), 8);
  EXPECT_EQ(r.test.rows(), 2);
  std::vector<std::size_t> all = r.train_rows;
  all.insert(all.end(), r.test_rows.begin(), r.test_rows.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
}

TEST(Split, ThreeHundredRowsGives240And60) {
  const PerfMatrix pm = oracle::random_perf_matrix(300, 2, 3);
  const SplitResult r = split(pm, SplitSpec{0.2, 11});
  EXPECT_EQ(r.train.rows(), 240);
  EXPECT_EQ(r.test.rows(), 60);
}

TEST(Split, DeterministicAndPartitionForManySeeds) {
  const PerfMatrix pm = oracle::random_perf_matrix(23, 4, 5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SplitResult a = split(pm, SplitSpec{0.3, seed});
    const SplitResult b = split(pm, SplitSpec{0.3, seed});
    EXPECT_EQ(a.test_rows, b.test_rows);
    EXPECT_TRUE(a.train == b.train);
    std::set<std::size_t> seen(a.train_rows.begin(), a.train_rows.end());
    for (std::size_t r : a.test_rows) EXPECT_TRUE(seen.insert(r).second);
    EXPECT_EQ(seen.size(), 23u);
    EXPECT_EQ(a.test_rows.size(), 7u);  // ceil(0.3 * 23) = ceil(6.9)
    for (std::size_t i = 0; i < a.test_rows.size(); ++i) {
      EXPECT_EQ(a.test.problems()[i], pm.problems()[a.test_rows[i]]);
    }
  }
}

TEST(Split, Errors) {
  const PerfMatrix one = oracle::random_perf_matrix(1, 2, 0);
  EXPECT_THROW(split(one, SplitSpec{0.2, 0}), InvalidArgument);
  const PerfMatrix pm = oracle::random_perf_matrix(5, 2, 0);
  EXPECT_THROW(split(pm, SplitSpec{0.0, 0}), InvalidArgument);
  EXPECT_THROW(split(pm, SplitSpec{1.0, 0}), InvalidArgument);
}

TEST(Synth, SaturatedSingleConfigEqualsPeak) {
  SynthModel model;
  model.noise_sigma = 0.0;
  const std::vector<ProblemSize> problems{{4096, 512, 4096, 4}};
  const std::vector<KernelConfig> configs{{2, 2, 2, 8, 8}};  // 12 registers, within budget
  const PerfMatrix pm = synth_generate(model, problems, configs);
  EXPECT_EQ(pm.value(0, 0), model.peak);
}

TEST(Synth, LargerTilesDominateOnLargeProblem) {
  SynthModel model;
  model.noise_sigma = 0.0;
  const std::vector<ProblemSize> problems{{8192, 8192, 8192, 1}};
  const std::vector<KernelConfig> configs{{4, 4, 4, 8, 8}, {1, 1, 1, 8, 8}};
  const PerfMatrix pm = synth_generate(model, problems, configs);
  // reuse(4,4,4) = 16/24 and reuse(1,1,1) = 1/3 before normalisation; both
  // saturate the device and stay within 48 registers, so the ratio is 2.
  EXPECT_GT(pm.value(0, 0), pm.value(0, 1));
  EXPECT_DOUBLE_EQ(pm.value(0, 0) / pm.value(0, 1), 2.0);
}

TEST(Synth, FormulaMatchesHandEvaluation) {
  SynthModel model;
  model.noise_sigma = 0.0;
  model.device_parallelism = 16384;
  model.reg_budget = 48;
  model.peak = 3000.0;
  const std::vector<ProblemSize> problems{{100, 64, 100, 1}};
  const std::vector<KernelConfig> configs{{8, 8, 8, 8, 8}, {2, 2, 2, 8, 8}};
  const PerfMatrix pm = synth_generate(model, problems, configs);
  // Independent evaluation of the throughput model for both columns.
  auto reuse = [](double r, double c) { return r * c / (r * c + r + c); };
  const double max_reuse = std::max(reuse(8, 8), reuse(2, 2));
  auto expected = [&](int R, int A, int C) {
    const double wi = 1.0 * std::ceil(100.0 / (R * 8)) * std::ceil(100.0 / (C * 8)) * 64;
    const double util = std::min(1.0, wi / 16384.0);
    const double regs = R * A + A * C + R * C;
    const double pressure = regs <= 48 ? 1.0 : 48.0 / regs;
    return std::max(3000.0 * util * reuse(R, C) / max_reuse * pressure, 3000.0 * 1e-4);
  };
  EXPECT_NEAR(pm.value(0, 0), expected(8, 8, 8), 1e-9);
  EXPECT_NEAR(pm.value(0, 1), expected(2, 2, 2), 1e-9);
  // Frozen from the evaluation above: 3000 * (256/16384) * (48/192) = 11.71875
  // for the 8x8x8 column.
  EXPECT_NEAR(pm.value(0, 0), 11.71875, 1e-9);
}

TEST(Synth, DeterministicPerSeed) {
  const auto problems = sample_problem_sizes(20, 4);
  const auto configs = enumerate_configs(default_tile_set(), default_wg_pairs());
  SynthModel model;
  model.seed = 9;
  EXPECT_TRUE(synth_generate(model, problems, configs) == synth_generate(model, problems, configs));
  EXPECT_EQ(sample_problem_sizes(20, 4), problems);
  model.seed = 10;
  EXPECT_FALSE(synth_generate(model, problems, configs) == synth_generate(SynthModel{}, problems, configs));
}

TEST(Synth, SampledSizesInRange) {
  const auto problems = sample_problem_sizes(200, 1);
  std::set<ProblemSize> unique(problems.begin(), problems.end());
  EXPECT_EQ(unique.size(), problems.size());
  for (const auto& p : problems) {
    for (auto d : {p.m, p.k, p.n}) {
      EXPECT_GE(d, 27);
      EXPECT_LE(d, 12544);
    }
    EXPECT_GE(p.batch, 1);
    EXPECT_LE(p.batch, 64);
    EXPECT_EQ(p.batch & (p.batch - 1), 0);
  }
}

TEST(SynthPlanted, WinnersAreUniqueRowOptima) {
  const auto configs = enumerate_configs(default_tile_set(), default_wg_pairs());
  PlantedModel model;
  model.regimes = 4;
  model.rows_per_regime = 10;
  model.seed = 3;
  const PlantedData data = synth_planted(model, configs);
  ASSERT_EQ(data.perf.rows(), 40);
  std::set<std::size_t> winners(data.winners.begin(), data.winners.end());
  EXPECT_EQ(winners.size(), 4u);
  for (Eigen::Index i = 0; i < data.perf.rows(); ++i) {
    const auto w = static_cast<Eigen::Index>(data.winners[static_cast<std::size_t>(data.regime[static_cast<std::size_t>(i)])]);
    for (Eigen::Index c = 0; c < data.perf.cols(); ++c) {
      if (c != w) EXPECT_LT(data.perf.value(i, c), data.perf.value(i, w));
    }
  }
}

TEST(SynthPlanted, Errors) {
  const auto configs = enumerate_configs(default_tile_set(), default_wg_pairs());
  PlantedModel model;
  model.regimes = 13;
  EXPECT_THROW(synth_planted(model, configs), InvalidArgument);
  model.regimes = 2;
  model.jitter = 0.5;
  EXPECT_THROW(synth_planted(model, configs), InvalidArgument);
}

}  // namespace
}  // namespace kptune
