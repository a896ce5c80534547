#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "kptune/dataset.hpp"

namespace kptune {

enum class NormKind { scaled, raw_cutoff, std_cutoff, sigmoid };

std::string_view to_string(NormKind kind);
/// Throws InvalidArgument for an unknown name.
NormKind parse_norm_kind(std::string_view name);
std::vector<NormKind> all_norm_kinds();

/// Per-problem map from raw throughput to relative performance in [0, 1].
struct NormScheme {
  NormKind kind = NormKind::scaled;
  double cutoff = 0.9;          // raw_cutoff and std_cutoff
  double sig_center = 0.85;     // sigmoid
  double sig_steepness = 50.0;  // sigmoid

  /// Throws InvalidArgument unless 0 < cutoff < 1, 0 < sig_center < 1 and
  /// sig_steepness > 0.
  void validate() const;
};

/// Maps a single ratio s = value / row_max. Values at exactly the cutoff
/// survive the cutoff schemes.
double apply_scheme(double s, const NormScheme& scheme);

/// Normalized matrix, same shape as its source.
struct NormMatrix {
  std::vector<ProblemSize> problems;
  std::vector<KernelConfig> configs;
  Eigen::MatrixXd values;
  NormScheme scheme;
  Eigen::VectorXd best_gflops;  // source row maxima

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }
};

NormMatrix normalize(const PerfMatrix& pm, const NormScheme& scheme);

}  // namespace kptune
