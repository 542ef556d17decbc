// Serial reference loops against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <map>

#include "cadaug/augmentation.hpp"
#include "cadaug/features.hpp"
#include "cadaug/labelling.hpp"
#include "cadaug/ml.hpp"
#include "cadaug/synth.hpp"

using namespace cadaug;

namespace {

const std::vector<ProblemInstance> &instances(std::size_t n) {
  static std::map<std::size_t, std::vector<ProblemInstance>> cache;
  auto &v = cache[n];
  if (v.empty()) {
    Rng rng(42);
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(synth::random_instance(rng, {}, "b" + std::to_string(i)));
  }
  return v;
}

struct Fitted {
  ml::TrainedModel model;
  Dataset test;
};

const Fitted &fitted() {
  static const Fitted f = [] {
    // prediction cost does not depend on label quality; skip sotd labelling
    const auto &insts = instances(600);
    Dataset ds;
    ds.schema = FeatureSchema::raw();
    auto fvs = featurize_all(insts, ds.schema);
    Rng rng(7);
    for (std::size_t i = 0; i < insts.size(); ++i)
      ds.rows.push_back({insts[i].id, fvs[i].values, OrderingLabel(static_cast<int>(uniform_below(rng, 6)))});
    auto [train, test] = split(ds, 0.3, 1);
    ml::Hyperparameters hp;
    hp.trees = 50;
    hp.max_features = ml::FeatureSubset::Sqrt;
    auto m = ml::TrainedModel::fit(ml::ModelKind::RandomForest, hp, ml::Matrix::from_dataset(train),
                                   [&] {
                                     std::vector<int> y;
                                     for (const auto &r : train.rows)
                                       y.push_back(r.label.index());
                                     return y;
                                   }(),
                                   1);
    return Fitted{std::move(m), augment_full(test)};
  }();
  return f;
}

void BM_FeaturizeSerial(benchmark::State &st) {
  const auto &insts = instances(static_cast<std::size_t>(st.range(0)));
  const auto schema = FeatureSchema::raw();
  for (auto _ : st)
    benchmark::DoNotOptimize(featurize_all_serial(insts, schema));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_FeaturizeParallel(benchmark::State &st) {
  const auto &insts = instances(static_cast<std::size_t>(st.range(0)));
  const auto schema = FeatureSchema::raw();
  for (auto _ : st)
    benchmark::DoNotOptimize(featurize_all(insts, schema));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_LabelSerial(benchmark::State &st) {
  const auto &insts = instances(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(label_all_by_sotd_serial(insts));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_LabelParallel(benchmark::State &st) {
  const auto &insts = instances(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(label_all_by_sotd(insts));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_AccuracySerial(benchmark::State &st) {
  const auto &f = fitted();
  for (auto _ : st)
    benchmark::DoNotOptimize(ml::accuracy_serial(f.model, f.test));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.test.size()));
}

void BM_AccuracyParallel(benchmark::State &st) {
  const auto &f = fitted();
  for (auto _ : st)
    benchmark::DoNotOptimize(ml::accuracy(f.model, f.test));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.test.size()));
}

} // namespace

BENCHMARK(BM_FeaturizeSerial)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FeaturizeParallel)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LabelSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LabelParallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccuracySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccuracyParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
