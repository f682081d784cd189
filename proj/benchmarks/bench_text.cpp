#include <benchmark/benchmark.h>

#include "citekit/document.hpp"

using namespace citekit;

namespace {

std::string long_answer(int statements) {
  std::string out;
  for (int i = 0; i < statements; ++i) {
    out += "The stadium in the city was built in year " + std::to_string(1900 + i) + " [" +
           std::to_string(i % 5 + 1) + "][" + std::to_string(i % 3 + 1) + "]. ";
  }
  return out;
}

}  // namespace

static void BM_ParseAnswer(benchmark::State& state) {
  const auto text = long_answer(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(parse_answer(text));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_ParseAnswer)->Arg(5)->Arg(50)->Arg(500);

static void BM_StripCitations(benchmark::State& state) {
  const auto text = long_answer(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(strip_citations(text));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_StripCitations)->Arg(5)->Arg(500);

static void BM_MakeDocument(benchmark::State& state) {
  const auto text = long_answer(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(make_document("Title", text, std::string("The stadium")));
}
BENCHMARK(BM_MakeDocument)->Arg(10)->Arg(100);
