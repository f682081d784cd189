#include <gtest/gtest.h>

#include "citekit/document.hpp"
#include "citekit/error.hpp"
#include "strip_oracle.hpp"
#include "test_support.hpp"

using namespace citekit;

TEST(ParseAnswer, GroupsMarkersBySentence) {
  const auto a = parse_answer("A was B [1][2]. C was D [3].");
  ASSERT_EQ(a.statements.size(), 2u);
  EXPECT_EQ(a.statements[0].cited_doc_ids(), (std::vector<int>{1, 2}));
  EXPECT_EQ(a.statements[1].cited_doc_ids(), (std::vector<int>{3}));
  EXPECT_EQ(a.statements[0].text, "A was B.");
  EXPECT_EQ(a.statements[0].citations[0].level, CitationLevel::document);
}

TEST(ParseAnswer, SingleCitedSentence) {
  const auto a = parse_answer("The first Apple iPhone was released on June 29, 2007 [2].");
  ASSERT_EQ(a.statements.size(), 1u);
  EXPECT_EQ(a.statements[0].cited_doc_ids(), std::vector<int>{2});
  EXPECT_EQ(a.statements[0].text, "The first Apple iPhone was released on June 29, 2007.");
}

TEST(ParseAnswer, NoCitations) {
  const auto a = parse_answer("No citations here.");
  ASSERT_EQ(a.statements.size(), 1u);
  EXPECT_FALSE(a.statements[0].has_citation());
}

TEST(ParseAnswer, EmptyText) {
  EXPECT_TRUE(parse_answer("").statements.empty());
  EXPECT_TRUE(parse_answer("   \n ").statements.empty());
}

TEST(ParseAnswer, MarkerAfterTerminatorAttachesToPrecedingSentence) {
  const auto a = parse_answer("First claim.[1] Second claim.[2]");
  ASSERT_EQ(a.statements.size(), 2u);
  EXPECT_EQ(a.statements[0].cited_doc_ids(), std::vector<int>{1});
  EXPECT_EQ(a.statements[1].cited_doc_ids(), std::vector<int>{2});
}

TEST(ParseAnswer, LeadingMarkerBindsForward) {
  const auto a = parse_answer("[3] X happened.");
  ASSERT_EQ(a.statements.size(), 1u);
  EXPECT_EQ(a.statements[0].cited_doc_ids(), std::vector<int>{3});
}

TEST(ParseAnswer, CommaAndRangeFormsAreText) {
  const auto a = parse_answer("X is Y [1,2]. Z is W [1-3].");
  ASSERT_EQ(a.statements.size(), 2u);
  EXPECT_FALSE(a.statements[0].has_citation());
  EXPECT_FALSE(a.statements[1].has_citation());
}

TEST(ParseAnswer, MidSentenceMarkerScopesWholeSentence) {
  const auto a = parse_answer("Toronto [1] hosted the game in 1991 [2].");
  ASSERT_EQ(a.statements.size(), 1u);
  EXPECT_EQ(a.statements[0].cited_doc_ids(), (std::vector<int>{1, 2}));
}

TEST(ParseAnswer, QuestionAndExclamationTerminate) {
  EXPECT_EQ(parse_answer("S1. S2? S3!").statements.size(), 3u);
}

TEST(StripCitations, Examples) {
  EXPECT_EQ(strip_citations("X [1][12] y."), "X y.");
  EXPECT_EQ(strip_citations("X."), "X.");
  EXPECT_EQ(strip_citations("[3] X [4]."), "X.");
}

TEST(StripCitations, AgreesWithRegexReference) {
  for (const char* s : {"A [1]. B [2][3].", "Toronto hosted it [1] in 1991 [2].", "No markers.",
                        "Many   spaces [10] here.", "[1][2] Lead."}) {
    EXPECT_EQ(strip_citations(s), oracle::strip_markers(s)) << s;
  }
}

TEST(RenderStatement, RoundTrips) {
  const auto a = parse_answer("A was B [1][2]. C was D.");
  EXPECT_EQ(render_statement(a.statements[0]), "A was B [1][2].");
  EXPECT_EQ(parse_answer(render_answer(a)).statements.size(), 2u);
}

TEST(SegmentSpans, SingleSentence) {
  const auto d = make_document("T", "  Just one sentence.  ");
  ASSERT_EQ(d.spans.size(), 1u);
  EXPECT_EQ(d.span_text(d.spans[0]), "Just one sentence.");
}

TEST(SegmentSpans, ThreeSentences) {
  const auto d = make_document("T", "S1. S2? S3!");
  ASSERT_EQ(d.spans.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(d.spans[i].span_idx, static_cast<int>(i));
  }
  EXPECT_EQ(d.span_text(d.spans[1]), "S2?");
}

TEST(SegmentSpans, ConcatenationRoundTrips) {
  const std::string text =
      "The 1991 All-Star Game was held on July 9, 1991. It was played at SkyDome. SkyDome is in Toronto. "
      "The American League won. Attendance was 52,383.";
  const auto d = make_document("T", text);
  ASSERT_EQ(d.spans.size(), 5u);
  std::string joined;
  for (const auto& s : d.spans) joined += (joined.empty() ? "" : " ") + std::string(d.span_text(s));
  EXPECT_EQ(joined, text);
}

TEST(DocStore, AssignsSequentialIds) {
  DocStore store;
  EXPECT_EQ(support::add_doc(store, "a", "A."), 1);
  for (int i = 2; i <= 5; ++i) support::add_doc(store, "x", "X.");
  EXPECT_EQ(support::add_doc(store, "b", "B."), 6);
  EXPECT_EQ(store.get(6).doc_id, 6);
  EXPECT_EQ(store.get(6).spans.front().doc_id, 6);
}

TEST(DocStore, NoDeduplication) {
  DocStore store;
  const int a = support::add_doc(store, "t", "Same text.");
  const int b = support::add_doc(store, "t", "Same text.");
  EXPECT_NE(a, b);
  EXPECT_EQ(store.size(), 2u);
}

TEST(DocStore, IdsAreNotReusedAfterRemoval) {
  DocStore store;
  support::add_doc(store, "a", "A.");
  const int b = support::add_doc(store, "b", "B.");
  store.remove(b);
  EXPECT_FALSE(store.contains(b));
  EXPECT_EQ(support::add_doc(store, "c", "C."), 3);
}

TEST(DocStore, UnknownIdThrows) {
  DocStore store;
  try {
    store.get(7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownDocId);
  }
  EXPECT_EQ(store.find(7), nullptr);
}

TEST(DocStore, CapacityIsEnforced) {
  DocStore store(1);
  support::add_doc(store, "a", "A.");
  try {
    support::add_doc(store, "b", "B.");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapacityExceeded);
  }
}

TEST(Document, SnippetIsLocatedInText) {
  const auto d = make_document("T", "One fact. Two fact. Three fact.", std::string("Two fact."));
  ASSERT_TRUE(d.snippet_range.has_value());
  EXPECT_EQ(d.text.substr(d.snippet_range->begin, d.snippet_range->size()), "Two fact.");
}

TEST(Document, NonVerbatimSnippetSnapsToBestSentence) {
  const auto d = make_document("T", "Paris is in France. Rome is in Italy.", std::string("rome italy"));
  ASSERT_TRUE(d.snippet.has_value());
  EXPECT_EQ(*d.snippet, "Rome is in Italy.");
}

TEST(Document, UnmatchableSnippetIsDropped) {
  const auto d = make_document("T", "Paris is in France.", std::string("zebra quantum"));
  EXPECT_FALSE(d.snippet.has_value());
}

TEST(Document, ViewFallsBackToFullText) {
  const auto d = make_document("T", "Body text.", std::nullopt, std::string("Short."));
  bool fell = false;
  EXPECT_EQ(d.view_text(DocView::summary, &fell), "Short.");
  EXPECT_FALSE(fell);
  EXPECT_EQ(d.view_text(DocView::snippet, &fell), "Body text.");
  EXPECT_TRUE(fell);
}

TEST(Document, ViewNames) {
  EXPECT_EQ(parse_doc_view("snippet"), DocView::snippet);
  EXPECT_EQ(to_string(DocView::summary), "summary");
  EXPECT_EQ(to_string(DocOrigin::retrieved_runtime), "retrieved_runtime");
}

TEST(Citations, DocumentLevelExpandsToEverySpan) {
  DocStore store;
  const int id = support::add_doc(store, "T", "A. B. C.");
  const auto spans = expand_citation(Citation::whole(id), store);
  EXPECT_EQ(spans, store.get(id).spans);
  EXPECT_EQ(cited_text({Citation::whole(id)}, store).find("B."), 3u);
}

TEST(Citations, SpanLevelExpandsToItsSpans) {
  DocStore store;
  const int id = support::add_doc(store, "T", "A. B. C.");
  const auto& d = store.get(id);
  const auto c = Citation::of_spans(id, {d.spans[1]});
  EXPECT_EQ(expand_citation(c, store), std::vector<SpanRef>{d.spans[1]});
  EXPECT_EQ(spans_text({d.spans[1]}, store), "B.");
}

TEST(Citations, MatchSpanFindsQuotedSentence) {
  const auto d = make_document("T", "Tim Paterson wrote 86-DOS. Microsoft bought it.");
  const auto s = match_span(d, "Microsoft bought it");
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->span_idx, 1);
  EXPECT_FALSE(match_span(d, "unrelated words entirely").has_value());
}

TEST(Citations, ScopeToSnippetView) {
  DocStore store;
  store.add(make_document("T", "First part. Second part. Third part.", std::string("Second part.")));
  auto a = parse_answer("Second part [1].");
  scope_citations(a, store, DocView::snippet);
  ASSERT_EQ(a.statements[0].citations.size(), 1u);
  const auto& c = a.statements[0].citations[0];
  EXPECT_EQ(c.level, CitationLevel::span);
  ASSERT_EQ(c.span_refs.size(), 1u);
  EXPECT_EQ(c.span_refs[0].span_idx, 1);
}

TEST(Citations, ScopeFullViewLeavesDocumentLevel) {
  DocStore store;
  store.add(make_document("T", "First part. Second part.", std::string("Second part.")));
  auto a = parse_answer("Second part [1].");
  scope_citations(a, store, DocView::full);
  EXPECT_EQ(a.statements[0].citations[0].level, CitationLevel::document);
}

TEST(Markers, FindsBracketedIntegers) {
  const auto m = find_markers("a [1] b [23][4]");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[1].doc_id, 23);
  EXPECT_TRUE(find_markers("[x] [1,2]").empty());
}
