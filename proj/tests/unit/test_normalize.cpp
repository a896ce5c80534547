#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kptune/error.hpp"
#include "kptune/normalize.hpp"
#include "oracles.hpp"

namespace kptune {
namespace {

NormScheme scheme_of(NormKind kind) {
  NormScheme s;
  s.kind = kind;
  return s;
}

PerfMatrix single_row(std::initializer_list<double> values) {
  std::vector<KernelConfig> configs;
  Eigen::MatrixXd v(1, static_cast<Eigen::Index>(values.size()));
  int j = 0;
  for (double x : values) {
    configs.push_back({j + 1, 1, 1, 8, 8});
    v(0, j++) = x;
  }
  return PerfMatrix({{64, 64, 64, 1}}, configs, v);
}

TEST(Normalize, ScaledDividesByRowMax) {
  const NormMatrix nm = normalize(single_row({10, 20, 5}), scheme_of(NormKind::scaled));
  EXPECT_EQ(nm.values(0, 0), 0.5);
  EXPECT_EQ(nm.values(0, 1), 1.0);
  EXPECT_EQ(nm.values(0, 2), 0.25);
  EXPECT_EQ(nm.best_gflops(0), 20.0);
}

TEST(Normalize, RawCutoff) {
  const NormScheme s = scheme_of(NormKind::raw_cutoff);
  EXPECT_EQ(apply_scheme(0.89, s), 0.0);
  EXPECT_EQ(apply_scheme(0.95, s), 0.95);
  EXPECT_EQ(apply_scheme(0.9, s), 0.9);  // the cutoff itself survives
}

TEST(Normalize, StdCutoff) {
  const NormScheme s = scheme_of(NormKind::std_cutoff);
  EXPECT_NEAR(apply_scheme(0.95, s), 0.5, 1e-12);
  EXPECT_EQ(apply_scheme(1.0, s), 1.0);
  EXPECT_EQ(apply_scheme(0.5, s), 0.0);
  EXPECT_EQ(apply_scheme(0.9, s), 0.0);
}

TEST(Normalize, SigmoidValues) {
  const NormScheme s = scheme_of(NormKind::sigmoid);
  EXPECT_EQ(apply_scheme(0.85, s), 0.5);
  // 1 / (1 + e^2.5)
  EXPECT_NEAR(apply_scheme(0.80, s), 0.0758581800212435, 1e-15);
  EXPECT_LT(apply_scheme(0.80, s), 0.1);
  // 1 / (1 + e^-7.5)
  EXPECT_NEAR(apply_scheme(1.0, s), 0.99944722136308, 1e-12);
  EXPECT_LT(apply_scheme(1.0, s), 1.0);
}

TEST(Normalize, SigmoidCenterIsHalfForAnyParameters) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> center(0.01, 0.99);
  std::uniform_real_distribution<double> steep(0.1, 500.0);
  for (int i = 0; i < 200; ++i) {
    NormScheme s = scheme_of(NormKind::sigmoid);
    s.sig_center = center(gen);
    s.sig_steepness = steep(gen);
    EXPECT_EQ(apply_scheme(s.sig_center, s), 0.5);
  }
}

TEST(Normalize, SchemeValidation) {
  NormScheme s;
  EXPECT_NO_THROW(s.validate());
  s.cutoff = 1.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = NormScheme{};
  s.sig_center = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = NormScheme{};
  s.sig_steepness = 0.0;
  EXPECT_THROW(s.validate(), InvalidArgument);
  s = NormScheme{};
  s.sig_steepness = -2.0;
  EXPECT_THROW(normalize(single_row({1, 2}), s), InvalidArgument);
}

TEST(Normalize, KindNames) {
  for (NormKind k : all_norm_kinds()) EXPECT_EQ(parse_norm_kind(to_string(k)), k);
  EXPECT_EQ(all_norm_kinds().size(), 4u);
  EXPECT_THROW(parse_norm_kind("zscore"), InvalidArgument);
}

class NormalizeProperties : public ::testing::TestWithParam<NormKind> {};

TEST_P(NormalizeProperties, RangeMonotoneAndArgmaxPreserved) {
  const NormScheme s = scheme_of(GetParam());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PerfMatrix pm = oracle::random_perf_matrix(12, 9, seed);
    const NormMatrix nm = normalize(pm, s);
    ASSERT_EQ(nm.rows(), pm.rows());
    ASSERT_EQ(nm.cols(), pm.cols());
    for (Eigen::Index i = 0; i < pm.rows(); ++i) {
      Eigen::Index raw_arg = 0;
      pm.values().row(i).maxCoeff(&raw_arg);
      Eigen::Index norm_arg = 0;
      nm.values.row(i).maxCoeff(&norm_arg);
      EXPECT_EQ(raw_arg, norm_arg);
      for (Eigen::Index a = 0; a < pm.cols(); ++a) {
        EXPECT_GE(nm.values(i, a), 0.0);
        EXPECT_LE(nm.values(i, a), 1.0);
        for (Eigen::Index b = 0; b < pm.cols(); ++b) {
          if (pm.value(i, a) <= pm.value(i, b)) EXPECT_LE(nm.values(i, a), nm.values(i, b));
        }
      }
    }
  }
  double prev = apply_scheme(0.0, s);
  for (int i = 1; i <= 1000; ++i) {
    const double cur = apply_scheme(i / 1000.0, s);
    EXPECT_LE(prev, cur);
    prev = cur;
  }
}

INSTANTIATE_TEST_SUITE_P(AllSchemes, NormalizeProperties,
                         ::testing::Values(NormKind::scaled, NormKind::raw_cutoff,
                                           NormKind::std_cutoff, NormKind::sigmoid));

TEST(Normalize, ScaledAndRawCutoffKeepRatiosExactly) {
  const PerfMatrix pm = oracle::random_perf_matrix(15, 11, 3);
  const NormMatrix scaled = normalize(pm, scheme_of(NormKind::scaled));
  const NormMatrix cut = normalize(pm, scheme_of(NormKind::raw_cutoff));
  for (Eigen::Index i = 0; i < pm.rows(); ++i) {
    const double best = pm.values().row(i).maxCoeff();
    EXPECT_EQ(scaled.values.row(i).maxCoeff(), 1.0);
    for (Eigen::Index j = 0; j < pm.cols(); ++j) {
      const double s = pm.value(i, j) / best;
      EXPECT_EQ(scaled.values(i, j), s);
      if (cut.values(i, j) != 0.0) EXPECT_EQ(cut.values(i, j), s);
      else EXPECT_LT(s, 0.9);
    }
  }
}

}  // namespace
}  // namespace kptune
