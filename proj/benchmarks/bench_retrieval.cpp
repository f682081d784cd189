#include <benchmark/benchmark.h>

#include <random>

#include "citekit/enhancers.hpp"

using namespace citekit;

namespace {

std::vector<std::string> synthetic_corpus(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> word(0, 499);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string doc;
    for (int w = 0; w < 60; ++w) doc += "w" + std::to_string(word(rng)) + " ";
    out.push_back(std::move(doc));
  }
  return out;
}

}  // namespace

static void BM_Bm25Index(benchmark::State& state) {
  const auto docs = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    Bm25 bm(docs);
    benchmark::DoNotOptimize(bm);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bm25Index)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_Bm25Rank(benchmark::State& state) {
  const auto docs = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 2);
  Bm25 bm(docs);
  for (auto _ : state) benchmark::DoNotOptimize(bm.rank("w3 w17 w250 w499"));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Bm25Rank)->Arg(100)->Arg(1000)->Arg(10000);

static void BM_RetrieveRelevance(benchmark::State& state) {
  std::vector<RawDoc> corpus;
  for (auto& t : synthetic_corpus(static_cast<std::size_t>(state.range(0)), 3)) corpus.push_back({"t", t, {}, {}});
  for (auto _ : state) {
    DocStore store;
    benchmark::DoNotOptimize(retrieve_relevance("w3 w17 w250", corpus, 5, store));
  }
}
BENCHMARK(BM_RetrieveRelevance)->Arg(100)->Arg(1000);
