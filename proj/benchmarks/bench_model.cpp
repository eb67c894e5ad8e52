#include <benchmark/benchmark.h>

#include <set>

#include "winnowtc/random.hpp"
#include "winnowtc/synth.hpp"
#include "winnowtc/training.hpp"

using namespace winnowtc;

namespace {

std::vector<SparseVector> documents(std::size_t count, std::size_t dim, std::size_t active, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SparseVector> docs;
  for (std::size_t i = 0; i < count; ++i) {
    std::set<FeatureId> ids;
    while (ids.size() < active) ids.insert(static_cast<FeatureId>(rng.index(dim)));
    std::vector<SparseVector::Entry> entries;
    for (auto id : ids) entries.push_back({id, 1.0});
    docs.emplace_back(std::move(entries));
  }
  return docs;
}

Algorithm algorithm_arg(const benchmark::State& state) { return static_cast<Algorithm>(state.range(0)); }

void BM_Score(benchmark::State& state) {
  const auto alg = algorithm_arg(state);
  const auto docs = documents(256, 100000, static_cast<std::size_t>(state.range(1)), 1);
  Classifier c(alg, HyperParams::defaults(alg), 50.0, 100000, {}, "c");
  for (std::size_t i = 0; i < docs.size(); i += 2) c.promote(docs[i]);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(c.score(docs[i++ % docs.size()]));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Score)->ArgsProduct({{0, 1, 2}, {16, 128, 1024}});

void BM_PromoteDemote(benchmark::State& state) {
  const auto alg = algorithm_arg(state);
  const auto docs = documents(256, 100000, static_cast<std::size_t>(state.range(1)), 2);
  Classifier c(alg, HyperParams::defaults(alg), 50.0, 100000, {}, "c");
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& v = docs[i++ % docs.size()];
    (i & 1) ? c.promote(v) : c.demote(v);
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_PromoteDemote)->ArgsProduct({{0, 1, 2}, {16, 128, 1024}});

void BM_TrainEpoch(benchmark::State& state) {
  const auto alg = algorithm_arg(state);
  const std::size_t n = 100000;
  auto target = SynthTarget::disjunction(SynthTarget::pick_relevant(10, n, 3), n);
  SynthCorpusSpec spec;
  spec.n_docs = 2000;
  spec.min_len = 20;
  spec.max_len = 200;
  spec.seed = 3;
  const auto set = gen_examples(target, spec);
  TrainConfig cfg;
  cfg.hyper = HyperParams::defaults(alg);
  for (auto _ : state) {
    state.PauseTiming();
    auto c = make_classifier(alg, cfg, 110.0, n, "", "c");
    state.ResumeTiming();
    benchmark::DoNotOptimize(train_epoch(c, set, {}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(set.size()));
}
BENCHMARK(BM_TrainEpoch)->DenseRange(0, 2);

}  // namespace

BENCHMARK_MAIN();
