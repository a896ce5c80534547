#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kptune/error.hpp"
#include "kptune/pca.hpp"
#include "oracles.hpp"

namespace kptune {
namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = d(gen);
  return m;
}

TEST(Pca, IdenticalRowsHaveZeroVariance) {
  Eigen::MatrixXd rows(4, 3);
  rows.rowwise() = Eigen::RowVector3d(0.2, 0.5, 1.0);
  const PcaModel model = fit_pca(rows);
  EXPECT_EQ(model.retained(), 3);
  for (Eigen::Index i = 0; i < model.retained(); ++i) {
    EXPECT_EQ(model.singular_values(i), 0.0);
    EXPECT_EQ(model.explained_ratio(i), 0.0);
  }
  const VarianceReport r = variance_report(model);
  EXPECT_EQ(r.components_80, 3u);
}

TEST(Pca, LineYEqualsTwoX) {
  Eigen::MatrixXd rows(5, 2);
  for (int i = 0; i < 5; ++i) rows.row(i) << i - 1.5, 2.0 * (i - 1.5);
  const PcaModel model = fit_pca(rows);
  EXPECT_NEAR(model.explained_ratio(0), 1.0, 1e-12);
  EXPECT_NEAR(model.explained_ratio(1), 0.0, 1e-12);
  EXPECT_NEAR(model.components(0, 0), 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(model.components(1, 0), 2.0 / std::sqrt(5.0), 1e-12);
}

TEST(Pca, RetainsMinOfRowsMinusOneAndCols) {
  EXPECT_EQ(fit_pca(random_matrix(3, 6, 1)).retained(), 2);
  EXPECT_EQ(fit_pca(random_matrix(9, 4, 1)).retained(), 4);
  EXPECT_EQ(fit_pca(random_matrix(5, 5, 1)).retained(), 4);
}

TEST(Pca, SingleRowIsInvalid) {
  EXPECT_THROW(fit_pca(random_matrix(1, 3, 0)), InvalidArgument);
}

TEST(Pca, RatiosSumToOneAndAreOrdered) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PcaModel m = fit_pca(random_matrix(7, 5, seed));
    EXPECT_NEAR(m.explained_ratio.sum(), 1.0, 1e-8);
    for (Eigen::Index i = 0; i < m.retained(); ++i) {
      EXPECT_GE(m.explained_ratio(i), 0.0);
      EXPECT_LE(m.explained_ratio(i), 1.0);
      if (i > 0) EXPECT_LE(m.explained_ratio(i), m.explained_ratio(i - 1));
    }
  }
}

TEST(Pca, ComponentsOrthonormalWithSignConvention) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PcaModel m = fit_pca(random_matrix(10, 6, seed));
    const Eigen::MatrixXd gram = m.components.transpose() * m.components;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(m.retained(), m.retained())).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index c = 0; c < m.retained(); ++c) {
      Eigen::Index arg = 0;
      m.components.col(c).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(m.components(arg, c), 0.0);
    }
  }
}

TEST(Pca, MatchesCovarianceEigenOracle) {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const Eigen::MatrixXd x = random_matrix(8, 5, seed);
    const PcaModel m = fit_pca(x);
    const auto expected = oracle::covariance_explained_ratios(oracle::to_table(x));
    for (Eigen::Index i = 0; i < m.retained(); ++i) {
      EXPECT_NEAR(m.explained_ratio(i), expected[static_cast<std::size_t>(i)], 1e-6);
    }
  }
}

TEST(Pca, FullRankReconstructionAndIsometry) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd x = random_matrix(8, 5, seed);
    const PcaModel m = fit_pca(x);
    const Eigen::MatrixXd z = transform(m, x, m.retained());
    const Eigen::MatrixXd back = inverse_transform(m, z);
    EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-6);
    for (Eigen::Index a = 0; a < x.rows(); ++a) {
      for (Eigen::Index b = 0; b < x.rows(); ++b) {
        EXPECT_NEAR((x.row(a) - x.row(b)).norm(), (z.row(a) - z.row(b)).norm(), 1e-6);
      }
    }
  }
}

TEST(Pca, FirstComponentVariance) {
  // Fixed 5x3 matrix; sigma_1 is checked against the covariance oracle.
  Eigen::MatrixXd x(5, 3);
  x << 2, 0, 1,
       4, 1, 0,
       6, 1, 2,
       8, 3, 1,
       10, 5, 1;
  const PcaModel m = fit_pca(x);
  const Eigen::MatrixXd z = transform(m, x, 1);
  const double mean = z.mean();
  EXPECT_NEAR(mean, 0.0, 1e-12);
  const double var = (z.array() - mean).square().sum() / 4.0;
  EXPECT_NEAR(var, m.singular_values(0) * m.singular_values(0) / 4.0, 1e-6);
  const auto oracle_values = oracle::jacobi_eigen([&] {
    oracle::Table centered = oracle::to_table(x);
    oracle::Table cov(3, std::vector<double>(3, 0.0));
    std::vector<double> mu(3, 0.0);
    for (auto& r : centered)
      for (int j = 0; j < 3; ++j) mu[static_cast<std::size_t>(j)] += r[static_cast<std::size_t>(j)] / 5.0;
    for (auto& r : centered)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) cov[i][j] += (r[i] - mu[i]) * (r[j] - mu[j]) / 4.0;
    return cov;
  }()).values;
  EXPECT_NEAR(var, oracle_values[0], 1e-6);
  // Frozen from the oracle above.
  EXPECT_NEAR(var, 13.7218912422647, 1e-9);
}

TEST(Pca, MeanRowMapsToOrigin) {
  const Eigen::MatrixXd x = random_matrix(6, 4, 9);
  const PcaModel m = fit_pca(x);
  const Eigen::MatrixXd z = transform(m, Eigen::MatrixXd(m.mean.transpose()), m.retained());
  EXPECT_LT(z.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, TransformRangeChecks) {
  const Eigen::MatrixXd x = random_matrix(6, 4, 9);
  const PcaModel m = fit_pca(x);
  EXPECT_THROW(transform(m, x, 0), InvalidArgument);
  EXPECT_THROW(transform(m, x, m.retained() + 1), InvalidArgument);
  EXPECT_EQ(transform(m, x, 2).cols(), 2);
}

TEST(Pca, RowPermutationInvariance) {
  const Eigen::MatrixXd x = random_matrix(9, 5, 4);
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 gen(1);
  std::shuffle(perm.begin(), perm.end(), gen);
  Eigen::MatrixXd y(9, 5);
  for (int i = 0; i < 9; ++i) y.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  const PcaModel a = fit_pca(x);
  const PcaModel b = fit_pca(y);
  EXPECT_LT((a.explained_ratio - b.explained_ratio).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pca, DeterministicAcrossFits) {
  const Eigen::MatrixXd x = random_matrix(9, 5, 4);
  const PcaModel a = fit_pca(x);
  const PcaModel b = fit_pca(x);
  EXPECT_EQ(a.components, b.components);
  EXPECT_EQ(a.explained_ratio, b.explained_ratio);
}

PcaModel model_with_ratios(std::vector<double> ratios) {
  PcaModel m;
  m.explained_ratio = Eigen::Map<Eigen::VectorXd>(ratios.data(), static_cast<Eigen::Index>(ratios.size()));
  m.singular_values = m.explained_ratio.cwiseSqrt();
  m.components = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ratios.size()),
                                           static_cast<Eigen::Index>(ratios.size()));
  m.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ratios.size()));
  return m;
}

TEST(VarianceReport, PrefixSumsAndThresholds) {
  const VarianceReport r = variance_report(model_with_ratios({0.5, 0.3, 0.2}));
  ASSERT_EQ(r.cumulative.size(), 3u);
  EXPECT_DOUBLE_EQ(r.cumulative[0], 0.5);
  EXPECT_DOUBLE_EQ(r.cumulative[1], 0.8);
  EXPECT_DOUBLE_EQ(r.cumulative[2], 1.0);
  EXPECT_EQ(r.components_80, 2u);
  EXPECT_EQ(r.components_90, 3u);
  EXPECT_EQ(r.components_95, 3u);
}

TEST(VarianceReport, SingleComponent) {
  const VarianceReport r = variance_report(model_with_ratios({1.0}));
  ASSERT_EQ(r.cumulative.size(), 1u);
  EXPECT_EQ(r.cumulative[0], 1.0);
  EXPECT_EQ(r.components_80, 1u);
  EXPECT_EQ(r.components_90, 1u);
  EXPECT_EQ(r.components_95, 1u);
}

TEST(VarianceReport, ComponentsForVariance) {
  const PcaModel m = model_with_ratios({0.6, 0.25, 0.1, 0.05});
  EXPECT_EQ(components_for_variance(m, 0.5), 1u);
  EXPECT_EQ(components_for_variance(m, 0.85), 2u);
  EXPECT_EQ(components_for_variance(m, 0.9), 3u);
  EXPECT_EQ(components_for_variance(m, 0.99), 4u);
}

}  // namespace
}  // namespace kptune
