#include "kptune/normalize.hpp"

#include <cmath>

#include "kptune/error.hpp"

namespace kptune {

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::scaled: return "scaled";
    case NormKind::raw_cutoff: return "raw_cutoff";
    case NormKind::std_cutoff: return "std_cutoff";
    case NormKind::sigmoid: return "sigmoid";
  }
  return "unknown";
}

NormKind parse_norm_kind(std::string_view name) {
  for (NormKind k : all_norm_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown normalization scheme '" + std::string(name) + "'");
}

std::vector<NormKind> all_norm_kinds() {
  return {NormKind::scaled, NormKind::raw_cutoff, NormKind::std_cutoff, NormKind::sigmoid};
}

void NormScheme::validate() const {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw InvalidArgument("cutoff must be in (0, 1)");
  if (!(sig_center > 0.0 && sig_center < 1.0)) throw InvalidArgument("sig_center must be in (0, 1)");
  if (!(sig_steepness > 0.0) || !std::isfinite(sig_steepness)) {
    throw InvalidArgument("sig_steepness must be > 0");
  }
}

double apply_scheme(double s, const NormScheme& scheme) {
  switch (scheme.kind) {
    case NormKind::scaled:
      return s;
    case NormKind::raw_cutoff:
      return s >= scheme.cutoff ? s : 0.0;
    case NormKind::std_cutoff:
      return s >= scheme.cutoff ? (s - scheme.cutoff) / (1.0 - scheme.cutoff) : 0.0;
    case NormKind::sigmoid:
      return 1.0 / (1.0 + std::exp(scheme.sig_steepness * (scheme.sig_center - s)));
  }
  return s;
}

NormMatrix normalize(const PerfMatrix& pm, const NormScheme& scheme) {
  scheme.validate();
  NormMatrix out;
  out.problems = pm.problems();
  out.configs = pm.configs();
  out.scheme = scheme;
  out.best_gflops = pm.row_max();
  out.values.resize(pm.rows(), pm.cols());
  for (Eigen::Index i = 0; i < pm.rows(); ++i) {
    const double best = out.best_gflops(i);
    for (Eigen::Index j = 0; j < pm.cols(); ++j) {
      out.values(i, j) = apply_scheme(pm.value(i, j) / best, scheme);
    }
  }
  return out;
}

}  // namespace kptune
