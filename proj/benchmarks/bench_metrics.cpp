#include <benchmark/benchmark.h>

#include "citekit/evaluator.hpp"

using namespace citekit;

namespace {

struct Fixture {
  DocStore store;
  Answer answer;

  explicit Fixture(int statements) {
    std::string text;
    for (int d = 1; d <= 5; ++d) {
      store.add(make_document("Doc " + std::to_string(d),
                              "The tower " + std::to_string(d) + " is tall. It stands in city " + std::to_string(d) +
                                  ". Grass grows near it."));
    }
    for (int i = 0; i < statements; ++i) {
      const int d = i % 5 + 1;
      text += "The tower " + std::to_string(d) + " is tall [" + std::to_string(d) + "][" +
              std::to_string((d % 5) + 1) + "]. ";
    }
    answer = parse_answer(text);
  }
};

}  // namespace

static void BM_RougeL(benchmark::State& state) {
  std::string a;
  std::string b;
  for (int i = 0; i < state.range(0); ++i) {
    a += "word" + std::to_string(i % 17) + " ";
    b += "word" + std::to_string(i % 13) + " ";
  }
  for (auto _ : state) benchmark::DoNotOptimize(rouge_l(a, b));
}
BENCHMARK(BM_RougeL)->Arg(50)->Arg(500);

static void BM_CitationPrecision(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  LexicalJudge judge;
  for (auto _ : state) benchmark::DoNotOptimize(citation_precision(f.answer, f.store, judge));
}
BENCHMARK(BM_CitationPrecision)->Arg(5)->Arg(50);

static void BM_CitationGranularity(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  LexicalJudge judge;
  for (auto _ : state) benchmark::DoNotOptimize(citation_granularity(f.answer, f.store, judge));
}
BENCHMARK(BM_CitationGranularity)->Arg(5)->Arg(50);

static void BM_EvaluateAll(benchmark::State& state) {
  Fixture f(10);
  DatasetRecord rec;
  rec.question = "Which tower is tall?";
  rec.gold_answer = "The tower 1 is tall.";
  rec.qa_pairs = {{"Which?", {"tower 1"}}};
  Evaluator ev(LexicalJudge{});
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(f.answer, rec, f.store));
}
BENCHMARK(BM_EvaluateAll);
