#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>
#include <vector>

#include "kptune/classify.hpp"
#include "kptune/clustering.hpp"
#include "kptune/codegen.hpp"
#include "kptune/dataset.hpp"
#include "kptune/features.hpp"
#include "kptune/normalize.hpp"
#include "kptune/pca.hpp"
#include "kptune/select.hpp"

namespace {

using namespace kptune;

const std::vector<KernelConfig>& configs() {
  static const auto c = enumerate_configs(default_tile_set(), default_wg_pairs());
  return c;
}

PerfMatrix synth(std::size_t problems) {
  return synth_generate(SynthModel{}, sample_problem_sizes(problems, 1), configs());
}

void BM_Normalize(benchmark::State& state) {
  const PerfMatrix pm = synth(static_cast<std::size_t>(state.range(0)));
  NormScheme scheme;
  scheme.kind = NormKind::sigmoid;
  for (auto _ : state) benchmark::DoNotOptimize(normalize(pm, scheme));
  state.SetItemsProcessed(state.iterations() * pm.rows() * pm.cols());
}
BENCHMARK(BM_Normalize)->Arg(100)->Arg(300);

void BM_Pca(benchmark::State& state) {
  const NormMatrix nm = normalize(synth(static_cast<std::size_t>(state.range(0))), NormScheme{});
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(nm));
}
BENCHMARK(BM_Pca)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const NormMatrix nm = normalize(synth(240), NormScheme{});
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(nm.values, k, 7));
}
BENCHMARK(BM_KMeans)->Arg(4)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_Spectral(benchmark::State& state) {
  const NormMatrix nm = normalize(synth(240), NormScheme{});
  for (auto _ : state) benchmark::DoNotOptimize(spectral_cluster(nm.values, 8, 7));
}
BENCHMARK(BM_Spectral)->Unit(benchmark::kMillisecond);

void BM_Hdbscan(benchmark::State& state) {
  const NormMatrix nm = normalize(synth(static_cast<std::size_t>(state.range(0))), NormScheme{});
  for (auto _ : state) benchmark::DoNotOptimize(hdbscan(nm.values, 5, 5));
}
BENCHMARK(BM_Hdbscan)->Arg(100)->Arg(240)->Unit(benchmark::kMillisecond);

struct Labeled {
  std::vector<FeatureVector> x;
  std::vector<int> y;
  ConfigSubset subset;
};

Labeled labeled(std::size_t problems, std::size_t k) {
  const PerfMatrix pm = synth(problems);
  const NormMatrix nm = normalize(pm, NormScheme{});
  Labeled l;
  l.subset = top_n(nm, k);
  l.y = label_best_in_subset(nm, l.subset);
  l.x = features_of(pm.problems());
  return l;
}

void BM_TrainTree(benchmark::State& state) {
  const Labeled l = labeled(static_cast<std::size_t>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(train_tree(l.x, l.y, TreeParams::preset_a()));
}
BENCHMARK(BM_TrainTree)->Arg(240)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_PredictTree(benchmark::State& state) {
  const Labeled l = labeled(240, 8);
  const TreeModel tree = train_tree(l.x, l.y, TreeParams::preset_a());
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_tree(tree, l.x[i]));
    i = (i + 1) % l.x.size();
  }
}
BENCHMARK(BM_PredictTree);

void BM_TrainForest(benchmark::State& state) {
  const Labeled l = labeled(240, 8);
  for (auto _ : state) benchmark::DoNotOptimize(train_forest(l.x, l.y, ForestParams{}));
}
BENCHMARK(BM_TrainForest)->Unit(benchmark::kMillisecond);

void BM_Knn(benchmark::State& state) {
  const Labeled l = labeled(240, 8);
  const KnnModel model(l.x, l.y);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(l.x[i], 7));
    i = (i + 1) % l.x.size();
  }
}
BENCHMARK(BM_Knn);

void BM_EmitNestedIf(benchmark::State& state) {
  const Labeled l = labeled(240, 8);
  const TreeModel tree = train_tree(l.x, l.y, TreeParams::preset_a());
  for (auto _ : state) benchmark::DoNotOptimize(emit_nested_if(tree, l.subset, configs()));
}
BENCHMARK(BM_EmitNestedIf)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
