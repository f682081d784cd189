#include <gtest/gtest.h>

#include "bm25_oracle.hpp"
#include "citekit/enhancers.hpp"
#include "citekit/error.hpp"
#include "test_support.hpp"

using namespace citekit;

namespace {

PromptTemplate recite_prompt() { return PromptTemplate("Recite one passage about {question}\nPassage:"); }

ModuleNode make(std::string id, std::shared_ptr<Module> m, Dispatch d = Dispatch::single, std::string key = "") {
  return ModuleNode{std::move(id), std::move(m), {}, d, std::move(key)};
}

}  // namespace

TEST(Bm25, OnlyMatchingDoc) {
  std::vector<RawDoc> corpus = {{"", "apple pie", {}, {}}, {"", "banana", {}, {}}};
  DocStore store;
  const auto r = retrieve_relevance("apple", corpus, 1, store);
  ASSERT_EQ(r.docs.size(), 1u);
  EXPECT_EQ(r.corpus_indices[0], 0u);
  EXPECT_EQ(r.docs[0].origin, DocOrigin::retrieved_runtime);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_EQ(r.doc_ids[0], 1);
}

TEST(Bm25, MatchesFormulaScores) {
  const std::vector<std::string> docs = {"apple pie recipe", "apple apple tart", "banana bread", "pie chart"};
  Bm25 bm(docs);
  const auto want = oracle::bm25_scores(docs, "apple pie");
  for (std::size_t i = 0; i < docs.size(); ++i) EXPECT_NEAR(bm.score(i, "apple pie"), want[i], 1e-12) << i;
  const auto ranked = bm.rank("apple pie");
  ASSERT_EQ(ranked.size(), docs.size());
  EXPECT_EQ(ranked[0].first, 0u);
  for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_GE(ranked[i - 1].second, ranked[i].second);
}

TEST(Bm25, TiesGoToLowerIndexAndZeroScoresNeverReturned) {
  std::vector<RawDoc> corpus = {{"", "unrelated", {}, {}}, {"", "same words", {}, {}}, {"", "same words", {}, {}}};
  DocStore store;
  const auto r = retrieve_relevance("words", corpus, 3, store);
  EXPECT_EQ(r.corpus_indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(r.scores[0], r.scores[1]);
}

TEST(Bm25, ExcludeAndErrors) {
  std::vector<RawDoc> corpus = {{"", "apple pie", {}, {}}, {"", "apple tart", {}, {}}};
  DocStore store;
  const auto r = retrieve_relevance("apple pie", corpus, 1, store, {0});
  EXPECT_EQ(r.corpus_indices, std::vector<std::size_t>{1});
  try {
    retrieve_relevance("x", {}, 1, store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCorpus);
  }
  EXPECT_THROW(retrieve_relevance("x", corpus, 0, store), Error);
}

TEST(Bm25, StoreCorpusAddsNothing) {
  DocStore store;
  support::add_doc(store, "A", "apple pie.");
  support::add_doc(store, "B", "banana split.");
  const auto r = retrieve_relevance("banana", store, 1);
  EXPECT_EQ(r.doc_ids, std::vector<int>{2});
  EXPECT_EQ(store.size(), 2u);
}

TEST(RetrieveIndex, LookUp) {
  DocStore store;
  for (int i = 0; i < 5; ++i) support::add_doc(store, "t" + std::to_string(i + 1), "Body.");
  EXPECT_EQ(retrieve_index(store, 3).title, "t3");
  try {
    retrieve_index(store, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownDocId);
  }
}

TEST(RetrieveInner, PassagesBecomeRuntimeDocs) {
  DocStore store;
  support::add_doc(store, "A", "Existing.");
  ScriptedBackend b(std::vector<std::string>{"Passage one.", "Passage two."});
  const auto r = retrieve_inner("q", b, 2, store, recite_prompt());
  EXPECT_EQ(r.doc_ids, (std::vector<int>{2, 3}));
  EXPECT_EQ(store.get(3).text, "Passage two.");
  EXPECT_EQ(store.get(2).origin, DocOrigin::retrieved_runtime);
}

TEST(RetrieveInner, RefusalBecomesRetrievalRefused) {
  ScriptedBackend b(std::vector<std::string>{"I cannot recite that."});
  b.set_refusal_prefixes({"I cannot"});
  DocStore store;
  try {
    retrieve_inner("q", b, 1, store, recite_prompt());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RetrievalRefused);
  }
}

TEST(Blueprint, SplitsOnQuestionMarks) {
  const auto p = parse_blueprint("Q1? Q2?");
  EXPECT_EQ(p.kind, Plan::Kind::blueprint_questions);
  EXPECT_EQ(p.questions, (std::vector<std::string>{"Q1?", "Q2?"}));
}

TEST(Blueprint, SoundOfSilenceExample) {
  const auto p = parse_blueprint(
      "Who is the original artist of sound of silence, the album? Who is the original artist of sound of "
      "silence, the song, released in 2016? Who is the original artist of sound of silence, the song, released "
      "in 1964?\"");
  ASSERT_EQ(p.questions.size(), 3u);
  EXPECT_EQ(p.questions[1], "Who is the original artist of sound of silence, the song, released in 2016?");
}

TEST(Blueprint, TruncatesToFourAndRejectsNone) {
  EXPECT_EQ(parse_blueprint("a? b? c? d? e? f?").questions.size(), kMaxBlueprintQuestions);
  try {
    parse_blueprint("No questions here.");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyPlan);
  }
}

TEST(Blueprint, PlanRendersDocsIntoPrompt) {
  DocStore store;
  support::add_doc(store, "Album", "Sounds of Silence is an album.");
  ScriptedBackend b(std::vector<std::string>{"Who made the album?"});
  const auto p = plan_blueprint("Who?", store, store.ids(), b, PromptTemplate("{question}\n{docs}\nSub-questions:"));
  EXPECT_EQ(p.questions.size(), 1u);
  ASSERT_EQ(b.prompts().size(), 1u);
  EXPECT_NE(b.prompts()[0].find("Document [1](Title: Album)"), std::string::npos);
}

TEST(Attribution, TwoClusters) {
  DocStore store;
  support::add_doc(store, "A", "Tim Paterson wrote 86-DOS. It ran on 8086 chips.");
  support::add_doc(store, "B", "Microsoft bought 86-DOS. IBM shipped it.");
  const auto p = parse_attribution(
      "1.\nDocument [1]: Tim Paterson wrote 86-DOS.\n2.\nDocument[2]: Microsoft bought 86-DOS.\nDocument [1]: It ran "
      "on 8086 chips.",
      store);
  EXPECT_EQ(p.kind, Plan::Kind::span_clusters);
  ASSERT_EQ(p.clusters.size(), 2u);
  ASSERT_EQ(p.clusters[0].size(), 1u);
  EXPECT_EQ(p.clusters[0][0].doc_id, 1);
  ASSERT_EQ(p.clusters[1].size(), 2u);
  EXPECT_EQ(p.clusters[1][0].doc_id, 2);
  EXPECT_EQ(p.clusters[1][1].span_idx, 1);
  EXPECT_EQ(render_cluster(p.clusters[1], store),
            "Document [2]: Microsoft bought 86-DOS.\nDocument [1]: It ran on 8086 chips.");
}

TEST(Attribution, UnmatchedQuotesAreDropped) {
  DocStore store;
  support::add_doc(store, "A", "Tim Paterson wrote 86-DOS.");
  const auto p = parse_attribution(
      "1.\nDocument [1]: Tim Paterson wrote 86-DOS.\nDocument [1]: zebras migrate south.\n2.\nDocument [7]: "
      "anything.",
      store);
  ASSERT_EQ(p.clusters.size(), 1u);
  EXPECT_EQ(p.clusters[0].size(), 1u);
}

TEST(Attribution, NoHeadersIsUnparseable) {
  DocStore store;
  support::add_doc(store, "A", "Text.");
  for (const char* s : {"", "Document [1]: Text."}) {
    try {
      parse_attribution(s, store);
      FAIL() << s;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::UnparseablePlan);
    }
  }
}

TEST(Feedback, ScoreFractions) {
  DocStore store;
  support::add_doc(store, "A", "Toronto hosted the game.");
  LexicalJudge j(1.0);
  EXPECT_DOUBLE_EQ(feedback_score(parse_answer("Toronto hosted the game [1]."), j, store).score, 1.0);
  const auto half = feedback_score(parse_answer("Toronto hosted the game [1]. Paris hosted it [1]."), j, store);
  EXPECT_EQ(half.kind, Feedback::Kind::score);
  EXPECT_DOUBLE_EQ(half.score, 0.5);
}

TEST(Feedback, RerankPicksBestLowestIndex) {
  DocStore store;
  support::add_doc(store, "A", "Toronto hosted the game.");
  LexicalJudge j(1.0);
  const auto f = feedback_rerank({"Paris hosted [1].", "Toronto hosted the game [1].", "Toronto hosted [1]."}, j, store);
  EXPECT_EQ(f.kind, Feedback::Kind::rerank_choice);
  EXPECT_EQ(f.choice_idx, 1u);
  EXPECT_EQ(f.passthrough, "Toronto hosted the game [1].");
  EXPECT_EQ(feedback_rerank({"Anything."}, j, store).choice_idx, 0u);
}

TEST(Feedback, Verify) {
  DocStore store;
  support::add_doc(store, "A", "Toronto hosted the game.");
  LexicalJudge j(1.0);
  EXPECT_FALSE(feedback_verify(parse_answer("Toronto hosted the game.").statements[0], store, j).verdict);
  EXPECT_TRUE(feedback_verify(parse_answer("Toronto hosted the game [1].").statements[0], store, j).verdict);
}

TEST(Editors, ReviseReplacesAnswer) {
  DocStore store;
  support::add_doc(store, "A", "Text.");
  ScriptedBackend b(std::vector<std::string>{"B [2]."});
  const auto out = edit_revise(parse_answer("A [1]."), "statement 1 unsupported", b, store, store.ids(), "Q?",
                               PromptTemplate("{question} {docs} {feedback}"));
  EXPECT_EQ(out.full_text, "B [2].");
  EXPECT_NE(b.prompts()[0].find("statement 1 unsupported"), std::string::npos);
}

TEST(Editors, EmptyRevisionKeepsOriginal) {
  DocStore store;
  ScriptedBackend b(std::vector<std::string>{""});
  std::vector<std::string> warnings;
  const auto out = edit_revise(parse_answer("A [1]."), "fb", b, store, {}, "Q?", PromptTemplate("{question} {feedback}"),
                               GenParams{}, &warnings);
  EXPECT_EQ(out.full_text, "A [1].");
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Editors, SimplifyDropsRedundantCitation) {
  DocStore store;
  support::add_doc(store, "A", "Apple announced the iPhone in January 2007.");
  support::add_doc(store, "B", "The first Apple iPhone was released on June 29, 2007.");
  SubstringJudge j;
  const auto st = parse_answer("The first Apple iPhone was released on June 29, 2007 [1][2].").statements[0];
  const auto out = edit_simplify(st, store, j);
  EXPECT_EQ(out.cited_doc_ids(), std::vector<int>{2});
  EXPECT_EQ(out.raw, "The first Apple iPhone was released on June 29, 2007 [2].");
}

TEST(Editors, SimplifyKeepsNecessaryAndUnsupported) {
  DocStore store;
  support::add_doc(store, "A", "SkyDome is a stadium.");
  support::add_doc(store, "B", "It is in Toronto.");
  LexicalJudge j(1.0);
  const auto needed = parse_answer("SkyDome stadium Toronto [1][2].").statements[0];
  EXPECT_EQ(edit_simplify(needed, store, j).cited_doc_ids(), (std::vector<int>{1, 2}));
  const auto single = parse_answer("SkyDome stadium [1].").statements[0];
  EXPECT_EQ(edit_simplify(single, store, j).cited_doc_ids(), std::vector<int>{1});
  const auto hopeless = parse_answer("Paris [1][2].").statements[0];
  EXPECT_EQ(edit_simplify(hopeless, store, j).cited_doc_ids(), (std::vector<int>{1, 2}));
}

TEST(Modules, GeneratorCandidatesEmitList) {
  GeneratorConfig cfg;
  cfg.prompt = PromptTemplate("{question}");
  cfg.candidates = 3;
  auto g = build_sequence({make("generator", std::make_shared<GeneratorModule>(cfg)),
                           make("reranker", std::make_shared<RerankerModule>())});
  DatasetRecord rec;
  rec.question = "Toronto game?";
  rec.doc_lists["docs"] = {{"A", "Toronto hosted the game.", {}, {}}};
  ScriptedBackend b(std::vector<std::string>{"Paris hosted [1].", "Toronto hosted the game [1].", "Nope [1]."});
  LexicalJudge j(1.0);
  const auto out = run_item(g, rec, b, j);
  EXPECT_EQ(out.answer.full_text, "Toronto hosted the game [1].");
}

TEST(Modules, PosthocRetrieverAddsCitation) {
  RelevanceConfig rc;
  rc.posthoc = true;
  GeneratorConfig cfg;
  cfg.prompt = PromptTemplate("{question}");
  auto g = build_sequence({make("generator", std::make_shared<GeneratorModule>(cfg)),
                           make("retriever", std::make_shared<RelevanceRetrieverModule>(rc))});
  DatasetRecord rec;
  rec.question = "Where is SkyDome?";
  rec.doc_lists["docs"] = {{"Other", "Bananas are yellow.", {}, {}}, {"SkyDome", "SkyDome is in Toronto.", {}, {}}};
  ScriptedBackend b(std::vector<std::string>{"SkyDome is in Toronto."});
  LexicalJudge j(1.0);
  RunOptions opts;
  opts.top_n = 0;
  const auto out = run_item(g, rec, b, j, opts);
  ASSERT_EQ(out.answer.statements.size(), 1u);
  ASSERT_EQ(out.answer.statements[0].citations.size(), 1u);
  const int id = out.answer.statements[0].citations[0].doc_id;
  EXPECT_EQ(out.store.get(id).title, "SkyDome");
}

TEST(Modules, InnerRetrieverFeedsGenerator) {
  GeneratorConfig cfg;
  cfg.prompt = PromptTemplate("{question}\n{docs}\nAnswer:");
  auto g = build_sequence({make("inner_retriever", std::make_shared<InnerRetrieverModule>(2, recite_prompt())),
                           make("generator", std::make_shared<GeneratorModule>(cfg))});
  DatasetRecord rec;
  rec.question = "Q?";
  rec.doc_lists["docs"] = {};
  std::vector<ScriptedBackend::Rule> rules = {{"Recite", {"Recited one.", "Recited two."}, false},
                                              {"", {"Answer [2]."}, false}};
  support::RecordingBackend b(std::make_unique<ScriptedBackend>(rules));
  LexicalJudge j;
  RunOptions opts;
  opts.top_n = 0;
  const auto out = run_item(g, rec, b, j, opts);
  EXPECT_EQ(out.trace.runtime_doc_ids, (std::vector<int>{1, 2}));
  const auto prompts = b.prompts();
  ASSERT_EQ(prompts.size(), 3u);
  EXPECT_NE(prompts[2].find("Document [2](Title: "), std::string::npos);
  EXPECT_NE(prompts[2].find("Recited two."), std::string::npos);
}

TEST(Modules, ScorerStoresFeedback) {
  auto g = build_sequence({make("scorer", std::make_shared<ScorerModule>(1.0))});
  DatasetRecord rec;
  rec.question = "Toronto hosted the game [1]. Paris hosted it [1].";
  rec.doc_lists["docs"] = {{"A", "Toronto hosted the game.", {}, {}}};
  ScriptedBackend b(std::vector<std::string>{"x"}, true);
  LexicalJudge j(1.0);
  const auto out = run_item(g, rec, b, j);
  EXPECT_EQ(out.answer.statements.size(), 2u);
}
