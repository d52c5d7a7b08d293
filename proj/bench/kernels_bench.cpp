// OpenMP kernels against their serial references.

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "hclgp/retrieval/embedding.hpp"
#include "hclgp/retrieval/kernels.hpp"

namespace {

using namespace hclgp::retrieval;

std::vector<double> random_rows(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(n * 31 + d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> rows;
  rows.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(d);
    for (double& x : v) x = normal(rng);
    auto u = UnitVector::normalize(std::move(v));
    rows.insert(rows.end(), u.values().begin(), u.values().end());
  }
  return rows;
}

std::vector<std::string> component_texts(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back("fn component_" + std::to_string(i) + "(app: string, item: string) {\n" +
                  "  let profile = supervisor::profile()\n  let secret = supervisor::password(app: app)\n" +
                  "  api(app, \"step_" + std::to_string(i % 17) + "\", id: item)\n}");
  }
  return out;
}

template <bool Parallel>
void BM_CosineScan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 256;
  auto rows = random_rows(n, d);
  auto query = random_rows(1, d);
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      cosine_scan(rows.data(), n, d, query.data(), out.data());
    } else {
      cosine_scan_serial(rows.data(), n, d, query.data(), out.data());
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_PairwiseSimilarity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto rows = random_rows(n, 256);
  for (auto _ : state) {
    auto m = Parallel ? pairwise_similarity(rows.data(), n, 256)
                      : pairwise_similarity_serial(rows.data(), n, 256);
    benchmark::DoNotOptimize(m.data());
  }
}

template <bool Parallel>
void BM_EmbedBatch(benchmark::State& state) {
  NgramEmbedding provider;
  auto texts = component_texts(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto v = Parallel ? embed_batch(provider, texts) : embed_batch_serial(provider, texts);
    benchmark::DoNotOptimize(v.data());
  }
}

BENCHMARK(BM_CosineScan<true>)->Name("cosine_scan/omp")->Arg(1000)->Arg(20000);
BENCHMARK(BM_CosineScan<false>)->Name("cosine_scan/serial")->Arg(1000)->Arg(20000);
BENCHMARK(BM_PairwiseSimilarity<true>)->Name("pairwise_similarity/omp")->Arg(200)->Arg(800);
BENCHMARK(BM_PairwiseSimilarity<false>)->Name("pairwise_similarity/serial")->Arg(200)->Arg(800);
BENCHMARK(BM_EmbedBatch<true>)->Name("embed_batch/omp")->Arg(100)->Arg(1000);
BENCHMARK(BM_EmbedBatch<false>)->Name("embed_batch/serial")->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
