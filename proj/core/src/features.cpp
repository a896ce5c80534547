#include "kptune/features.hpp"

#include <cmath>

namespace kptune {

FeatureVector features_of(const ProblemSize& p) {
  return {std::log2(static_cast<double>(p.m)), std::log2(static_cast<double>(p.k)),
          std::log2(static_cast<double>(p.n)), std::log2(static_cast<double>(p.batch))};
}

std::vector<FeatureVector> features_of(std::span<const ProblemSize> problems) {
  std::vector<FeatureVector> out;
  out.reserve(problems.size());
  for (const auto& p : problems) out.push_back(features_of(p));
  return out;
}

double split_threshold(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  // Adjacent doubles: the midpoint rounds onto a, which would send a right.
  return mid > a ? mid : b;
}

}  // namespace kptune
