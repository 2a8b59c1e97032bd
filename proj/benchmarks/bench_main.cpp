#include <benchmark/benchmark.h>
#include <zsl/classify.hpp>
#include <zsl/corpus.hpp>
#include <zsl/fixture_backend.hpp>
#include <zsl/labelcfg.hpp>
#include <zsl/metrics.hpp>
#include <zsl/stats.hpp>

#include <random>

namespace {

zsl::DatasetProfile three_class() {
  zsl::DatasetProfile p;
  p.name = "bench";
  p.classes = {"positive", "negative", "neutral"};
  p.instance_noun = "app review";
  return p;
}

void BM_Confusion_F1(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> cls{"positive", "negative", "neutral"};
  std::mt19937_64 rng(1);
  std::vector<std::string> gold(n);
  std::vector<std::optional<std::string>> pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    gold[i] = cls[rng() % 3];
    pred[i] = cls[rng() % 3];
  }
  for (auto _ : state) {
    auto cm = zsl::confusion(gold, pred, cls);
    benchmark::DoNotOptimize(zsl::macro_f1(cm) + zsl::micro_f1(cm));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_Confusion_F1)->Arg(1000)->Arg(100000);

void BM_ScottKnott(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<zsl::Treatment> ts;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> s(7);
    double c = u(rng);
    for (auto& x : s) x = c + 0.05 * u(rng);
    ts.push_back({"t" + std::to_string(i), s});
  }
  for (auto _ : state) benchmark::DoNotOptimize(zsl::scott_knott_esd(ts));
}
BENCHMARK(BM_ScottKnott)->Arg(10)->Arg(100)->Arg(400);

void BM_Kappa(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const char* cats[] = {"a", "b", "c"};
  std::vector<std::string> a(10000), b(10000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = cats[rng() % 3];
    b[i] = cats[rng() % 3];
  }
  for (auto _ : state) benchmark::DoNotOptimize(zsl::cohens_kappa(a, b));
}
BENCHMARK(BM_Kappa);

void BM_EmbedClassify(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  auto vec = [&] {
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    return zsl::EmbeddingVector{v, "m", false};
  };
  std::vector<std::pair<zsl::ClassId, zsl::EmbeddingVector>> labels{
      {"positive", vec()}, {"negative", vec()}, {"neutral", vec()}};
  auto inst = vec();
  for (auto _ : state) benchmark::DoNotOptimize(zsl::embed_classify(inst, labels));
}
BENCHMARK(BM_EmbedClassify)->Arg(384)->Arg(1536);

void BM_RenderLabels(benchmark::State& state) {
  auto p = three_class();
  for (auto _ : state)
    for (auto cfg : zsl::kAllLabelConfigs) benchmark::DoNotOptimize(zsl::render_label_set(cfg, p));
}
BENCHMARK(BM_RenderLabels);

void BM_Postprocess(benchmark::State& state) {
  auto p = three_class();
  auto labels = zsl::render_label_set(zsl::LabelConfigId::L6, p);
  const std::string reply = "Reading this carefully, I'd say the review expresses negative sentiment overall.";
  for (auto _ : state) benchmark::DoNotOptimize(zsl::postprocess_output(reply, zsl::LabelConfigId::L6, labels));
}
BENCHMARK(BM_Postprocess);

void BM_HashEmbedding(benchmark::State& state) {
  const std::string text = "The new release fixed the crash on startup, thanks for the quick turnaround!";
  for (auto _ : state) benchmark::DoNotOptimize(zsl::hash_embedding(text, 64, 17));
}
BENCHMARK(BM_HashEmbedding);

void BM_StratifiedSplit(benchmark::State& state) {
  zsl::Dataset ds;
  ds.profile = three_class();
  const std::pair<const char*, int> mix[] = {{"positive", 2013}, {"negative", 2087}, {"neutral", 3022}};
  for (auto [c, n] : mix)
    for (int i = 0; i < n; ++i) ds.instances.push_back({std::string(c) + std::to_string(i), "t", c});
  for (auto _ : state) benchmark::DoNotOptimize(zsl::stratified_split(ds, 42));
}
BENCHMARK(BM_StratifiedSplit);

}  // namespace
BENCHMARK_MAIN();
