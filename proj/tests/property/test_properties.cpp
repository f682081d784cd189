#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bm25_oracle.hpp"
#include "citekit/enhancers.hpp"
#include "citekit/error.hpp"
#include "citekit/text.hpp"
#include "strip_oracle.hpp"
#include "test_support.hpp"

using namespace citekit;

namespace {

constexpr int kCases = 300;

const std::vector<std::string>& vocab() {
  static const std::vector<std::string> v = {"tower", "city",  "river", "stadium", "album", "song",  "game",
                                             "paris", "tokyo", "built", "hosted",  "wrote", "first", "tall"};
  return v;
}

std::string pick(std::mt19937& rng, const std::vector<std::string>& from) {
  return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
}

int uniform(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string words(std::mt19937& rng, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? " " : "") + pick(rng, vocab());
  return out;
}

std::string markers(std::mt19937& rng, int max_id) {
  std::string out;
  for (int i = uniform(rng, 0, 3); i > 0; --i) out += "[" + std::to_string(uniform(rng, 1, max_id)) + "]";
  return out;
}

// "w w [k][j]. w w w. ..." with markers before the terminator.
std::string random_answer(std::mt19937& rng, int max_id = 9) {
  std::string out;
  for (int s = uniform(rng, 1, 4); s > 0; --s) {
    if (!out.empty()) out += " ";
    out += words(rng, uniform(rng, 1, 5));
    const auto m = markers(rng, max_id);
    if (!m.empty()) out += " " + m;
    out += ".";
  }
  return out;
}

std::string random_text(std::mt19937& rng) {
  std::string out;
  for (int s = uniform(rng, 1, 5); s > 0; --s) {
    if (!out.empty()) out += std::string(static_cast<std::size_t>(uniform(rng, 1, 2)), ' ');
    out += words(rng, uniform(rng, 1, 6));
    out += pick(rng, {".", "!", "?"});
  }
  return out;
}

}  // namespace

TEST(Property, StripMatchesRegexAndIsIdempotent) {
  std::mt19937 rng(11);
  for (int i = 0; i < kCases; ++i) {
    const auto a = random_answer(rng);
    const auto once = strip_citations(a);
    EXPECT_EQ(once, oracle::strip_markers(a)) << a;
    EXPECT_EQ(strip_citations(once), once);
    EXPECT_TRUE(find_markers(once).empty());
  }
}

TEST(Property, AnswerRenderRoundTrip) {
  std::mt19937 rng(12);
  for (int i = 0; i < kCases; ++i) {
    const auto a = parse_answer(random_answer(rng));
    const auto again = parse_answer(render_answer(a));
    ASSERT_EQ(again.statements.size(), a.statements.size());
    for (std::size_t s = 0; s < a.statements.size(); ++s) {
      EXPECT_EQ(again.statements[s].text, a.statements[s].text);
      EXPECT_EQ(again.statements[s].cited_doc_ids(), a.statements[s].cited_doc_ids());
    }
    EXPECT_EQ(strip_citations(render_answer(a)), strip_citations(a.full_text));
  }
}

TEST(Property, SpansPartitionSentencesAndExpandMatches) {
  std::mt19937 rng(13);
  for (int i = 0; i < kCases; ++i) {
    DocStore store;
    const int id = store.add(make_document("T", random_text(rng)));
    const Document& doc = store.get(id);
    ASSERT_FALSE(doc.spans.empty());
    std::size_t prev_end = 0;
    for (std::size_t k = 0; k < doc.spans.size(); ++k) {
      const auto& s = doc.spans[k];
      EXPECT_EQ(s.doc_id, id);
      EXPECT_EQ(s.span_idx, static_cast<int>(k));
      EXPECT_GE(s.range.begin, prev_end);
      EXPECT_LT(s.range.begin, s.range.end);
      EXPECT_LE(s.range.end, doc.text.size());
      EXPECT_EQ(text::trim(doc.span_text(s)), doc.span_text(s));
      prev_end = s.range.end;
    }
    EXPECT_EQ(expand_citation(Citation::whole(id), store), doc.spans);
  }
}

TEST(Property, DocStoreIdsUniqueAndIncreasing) {
  std::mt19937 rng(14);
  for (int round = 0; round < 50; ++round) {
    DocStore store(64);
    std::set<int> issued;
    int last = 0;
    for (int op = 0; op < 60; ++op) {
      if (!store.empty() && uniform(rng, 0, 3) == 0) {
        const auto ids = store.ids();
        store.remove(ids[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(ids.size()) - 1))]);
        continue;
      }
      if (store.size() == 64) break;
      const int id = store.add(make_document("t", "Body."));
      EXPECT_GT(id, last);
      EXPECT_TRUE(issued.insert(id).second);
      last = id;
    }
    const auto ids = store.ids();
    EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  }
}

TEST(Property, SimplifyKeepsSubsetAndSupport) {
  std::mt19937 rng(15);
  LexicalJudge judge(1.0);
  for (int i = 0; i < kCases; ++i) {
    DocStore store;
    std::vector<std::string> bodies;
    for (int d = 0; d < 4; ++d) {
      bodies.push_back(words(rng, uniform(rng, 2, 5)) + ".");
      store.add(make_document("d" + std::to_string(d), bodies.back()));
    }
    std::string cites;
    std::string claim;
    for (int d = 1; d <= 4; ++d) {
      if (uniform(rng, 0, 1) == 0) continue;
      cites += "[" + std::to_string(d) + "]";
      if (uniform(rng, 0, 1) == 0) claim += (claim.empty() ? "" : " ") + text::whitespace_tokens(bodies[d - 1])[0];
    }
    if (cites.empty() || claim.empty()) continue;
    const auto st = parse_answer(claim + " " + cites + ".").statements.at(0);
    const auto out = edit_simplify(st, store, judge);
    const auto before = st.cited_doc_ids();
    const auto after = out.cited_doc_ids();
    EXPECT_FALSE(after.empty());
    EXPECT_TRUE(std::includes(before.begin(), before.end(), after.begin(), after.end()));
    if (citations_entail(judge, st.citations, store, st.text)) {
      EXPECT_TRUE(citations_entail(judge, out.citations, store, out.text)) << st.raw << " -> " << out.raw;
    }
  }
}

TEST(Property, RerankChoiceHasMaxScore) {
  std::mt19937 rng(16);
  LexicalJudge judge(1.0);
  for (int i = 0; i < 100; ++i) {
    DocStore store;
    for (int d = 0; d < 3; ++d) store.add(make_document("d", words(rng, 4) + "."));
    std::vector<std::string> candidates;
    for (int c = uniform(rng, 1, 5); c > 0; --c) candidates.push_back(random_answer(rng, 3));
    const auto f = feedback_rerank(candidates, judge, store);
    std::vector<double> scores;
    for (const auto& c : candidates) scores.push_back(feedback_score(parse_answer(c), judge, store).score);
    const auto best = std::max_element(scores.begin(), scores.end());
    EXPECT_EQ(f.choice_idx, static_cast<std::size_t>(best - scores.begin()));
  }
}

TEST(Property, CompletionsNeverContainStopStrings) {
  std::mt19937 rng(17);
  const std::vector<std::string> pieces = {"alpha", " ", "\n", "##", "END", "beta", "#", "E"};
  for (int i = 0; i < kCases; ++i) {
    std::string response;
    for (int k = uniform(rng, 0, 8); k > 0; --k) response += pick(rng, pieces);
    ScriptedBackend b(std::vector<std::string>{response});
    GenParams params;
    params.stop = {"##", "END"};
    if (uniform(rng, 0, 1)) params.stop.push_back("\n");
    const auto out = generate(b, "p", params);
    for (const auto& s : params.stop) EXPECT_EQ(out.text.find(s), std::string::npos) << response;
    EXPECT_EQ(response.rfind(out.text, 0), 0u);
  }
}

TEST(Property, IterativeGenerationIsBounded) {
  std::mt19937 rng(18);
  for (int i = 0; i < 100; ++i) {
    const int max_turns = uniform(rng, 1, 8);
    std::vector<std::string> queue;
    for (int k = uniform(rng, 1, 10); k > 0; --k) queue.push_back(uniform(rng, 0, 4) ? "S." : "");
    ScriptedBackend b(queue, true);
    const auto out = generate_iterative(b, PromptTemplate("{question} {prefix}"), {{"question", "q"}},
                                        [](std::string_view t) { return t.empty(); }, max_turns);
    EXPECT_LE(b.calls(), static_cast<std::size_t>(max_turns));
    EXPECT_LE(out.size(), b.calls());
    for (const auto& c : out) EXPECT_FALSE(c.text.empty());
  }
}

namespace {

class PassModule final : public Module {
public:
  Payload run(const Payload& input, RunContext&) override { return input; }
  NodeKind kind() const override { return NodeKind::editor; }
  std::string role() const override { return "pass"; }
};

class FailOnMarkModule final : public Module {
public:
  Payload run(const Payload& input, RunContext& ctx) override {
    if (ctx.question.find("fail") != std::string::npos) throw Error(ErrorKind::BackendUnavailable, "down");
    return input;
  }
  NodeKind kind() const override { return NodeKind::generator; }
  std::string role() const override { return "generator"; }
};

}  // namespace

TEST(Property, StepBudgetIsNeverExceeded) {
  std::mt19937 rng(19);
  ScriptedBackend backend(std::vector<std::string>{"x"}, true);
  LexicalJudge judge;
  for (int i = 0; i < 60; ++i) {
    const int budget = uniform(rng, 1, 40);
    const int loops = uniform(rng, 1, 40);
    PipelineGraph g;
    g.add_node(ModuleNode{"n", std::make_shared<PassModule>(), {}, Dispatch::single, ""});
    g.set_target("n", Condition::turn_lt(loops), "n");
    g.set_target("n", Condition::always(), std::string(kOutputNode));
    g.max_total_steps = budget;
    DatasetRecord rec;
    rec.question = "q.";
    rec.doc_lists["docs"] = {};
    try {
      const auto out = run_item(g, rec, backend, judge);
      EXPECT_LE(loops, budget);
      EXPECT_EQ(out.trace.steps.size(), static_cast<std::size_t>(loops));
    } catch (const StepBudgetExhaustedError& e) {
      EXPECT_GT(loops, budget);
      EXPECT_EQ(e.trace().steps.size(), static_cast<std::size_t>(budget));
    }
  }
}

TEST(Property, ItemFailuresAreIsolated) {
  std::mt19937 rng(20);
  auto g = build_sequence({ModuleNode{"gen", std::make_shared<FailOnMarkModule>(), {}, Dispatch::single, ""}});
  ScriptedBackend backend(std::vector<std::string>{"x"}, true);
  LexicalJudge judge;
  for (int i = 0; i < 20; ++i) {
    Dataset ds;
    std::vector<bool> fails;
    for (int k = uniform(rng, 1, 12); k > 0; --k) {
      fails.push_back(uniform(rng, 0, 2) == 0);
      DatasetRecord rec;
      rec.question = std::string(fails.back() ? "fail " : "fine ") + std::to_string(k) + ".";
      rec.doc_lists["docs"] = {};
      ds.records.push_back(rec);
    }
    RunOptions opts;
    opts.workers = uniform(rng, 1, 4);
    const auto results = run_on_dataset(g, ds, backend, judge, {}, opts);
    ASSERT_EQ(results.size(), fails.size());
    for (std::size_t k = 0; k < fails.size(); ++k) {
      EXPECT_EQ(results[k].index, k);
      EXPECT_EQ(results[k].ok, !fails[k]);
      if (!fails[k]) {
        EXPECT_EQ(results[k].answer.full_text, ds.records[k].question);
      }
    }
  }
}

TEST(Property, Bm25NeverReturnsZeroScoreDocs) {
  std::mt19937 rng(21);
  for (int i = 0; i < kCases; ++i) {
    std::vector<RawDoc> corpus;
    std::vector<std::string> texts;
    for (int d = uniform(rng, 1, 8); d > 0; --d) {
      corpus.push_back({"", words(rng, uniform(rng, 1, 6)), {}, {}});
      texts.push_back(indexed_text(corpus.back()));
    }
    const std::string query = words(rng, uniform(rng, 1, 3));
    const auto want = oracle::bm25_scores(texts, query);
    DocStore store;
    try {
      const auto r = retrieve_relevance(query, corpus, static_cast<std::size_t>(uniform(rng, 1, 5)), store);
      for (std::size_t k = 0; k < r.corpus_indices.size(); ++k) {
        EXPECT_GT(want[r.corpus_indices[k]], 0.0);
        EXPECT_NEAR(r.scores[k], want[r.corpus_indices[k]], 1e-9);
      }
      EXPECT_EQ(store.size(), r.docs.size());
    } catch (const Error& e) {
      ADD_FAILURE() << e.what();
    }
  }
}
