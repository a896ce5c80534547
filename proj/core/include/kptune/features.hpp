#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "kptune/dataset.hpp"

namespace kptune {

/// Classifier input: log2 of (m, k, n, batch).
using FeatureVector = std::array<double, 4>;

inline constexpr std::size_t kFeatureCount = 4;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "log2_m", "log2_k", "log2_n", "log2_batch"};

FeatureVector features_of(const ProblemSize& p);
std::vector<FeatureVector> features_of(std::span<const ProblemSize> problems);

/// Split point between two adjacent distinct sorted values a < b such that
/// a < t <= b, so "go left iff x < t" separates them.
double split_threshold(double a, double b);

}  // namespace kptune
