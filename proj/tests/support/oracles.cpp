#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace kptune::oracle {

EigenPairs jacobi_eigen(Table a, double tol, int max_sweeps) {
  const std::size_t n = a.size();
  Table v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    }
    if (off <= tol * tol * std::max(total, 1e-300)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPairs out;
  for (std::size_t i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    out.vectors.push_back(col);
  }
  return out;
}

std::vector<double> covariance_explained_ratios(const Table& rows) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / static_cast<double>(n);
  Table cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / static_cast<double>(n - 1);
      }
    }
  }
  auto values = jacobi_eigen(cov).values;
  double sum = 0.0;
  for (double& v : values) {
    v = std::max(v, 0.0);
    sum += v;
  }
  for (double& v : values) v = sum > 0 ? v / sum : 0.0;
  return values;
}

double brute_force_ceiling(const Table& values, const std::vector<std::size_t>& subset) {
  long double product = 1.0L;
  for (const auto& row : values) {
    const double best = *std::max_element(row.begin(), row.end());
    double best_subset = 0.0;
    for (std::size_t c : subset) best_subset = std::max(best_subset, row[c]);
    product *= static_cast<long double>(best_subset) / best;
  }
  return static_cast<double>(std::pow(product, 1.0L / static_cast<long double>(values.size())));
}

Table to_table(const Eigen::MatrixXd& m) {
  Table t(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return t;
}

Eigen::MatrixXd to_matrix(const Table& t) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(t.front().size()));
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t[i][j];
  return m;
}

Blobs make_blobs(const Table& centers, int per_blob, double radius, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> jitter(-radius, radius);
  const auto dims = static_cast<Eigen::Index>(centers.front().size());
  Blobs out;
  out.points.resize(static_cast<Eigen::Index>(centers.size()) * per_blob, dims);
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < centers.size(); ++b) {
    for (int i = 0; i < per_blob; ++i, ++row) {
      for (Eigen::Index d = 0; d < dims; ++d) out.points(row, d) = centers[b][static_cast<std::size_t>(d)] + jitter(gen);
      out.membership.push_back(static_cast<int>(b));
    }
  }
  return out;
}

PerfMatrix random_perf_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> value(1.0, 100.0);
  std::vector<ProblemSize> problems;
  for (int i = 0; i < rows; ++i) problems.push_back({i + 1, 2 * i + 3, 64, 1});
  std::vector<KernelConfig> configs;
  for (int j = 0; j < cols; ++j) configs.push_back({1 + j % 8, 1 + j / 8, 1, 8, 8});
  Eigen::MatrixXd v(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) v(i, j) = value(gen);
  return PerfMatrix(problems, configs, v);
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd;
  std::map<int, int> bwd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    auto [f, f_new] = fwd.emplace(a[i], b[i]);
    auto [g, g_new] = bwd.emplace(b[i], a[i]);
    if (f->second != b[i] || g->second != a[i]) return false;
  }
  return true;
}

}  // namespace kptune::oracle
