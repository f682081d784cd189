#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citekit/dataset.hpp"
#include "citekit/document.hpp"
#include "citekit/judge.hpp"
#include "citekit/llm.hpp"
#include "citekit/pipeline.hpp"

namespace citekit {

// ---------------------------------------------------------------- retrievers

/// Okapi BM25 over lowercased word tokens.
class Bm25 {
public:
  static constexpr double kK1 = 1.2;
  static constexpr double kB = 0.75;

  explicit Bm25(const std::vector<std::string>& documents);

  /// Every document as (index, score), best first; equal scores keep index order.
  std::vector<std::pair<std::size_t, double>> rank(std::string_view query) const;
  double score(std::size_t doc, std::string_view query) const;
  double idf(const std::string& term) const;
  std::size_t size() const noexcept { return lengths_.size(); }

private:
  double score_tokens(std::size_t doc, const std::vector<std::string>& query) const;

  std::vector<std::unordered_map<std::string, int>> tf_;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, std::size_t> df_;
  double avg_len_ = 0.0;
};

/// Title and text, the fields relevance retrieval indexes.
std::string indexed_text(const RawDoc& doc);
std::string indexed_text(const Document& doc);

struct RetrievalResult {
  std::vector<Document> docs;
  std::vector<double> scores;
  /// Store ids of `docs`, parallel to it.
  std::vector<int> doc_ids;
  /// Corpus positions of `docs` when retrieved from a RawDoc corpus.
  std::vector<std::size_t> corpus_indices;
};

/// Top-k corpus documents with a positive score; each is added to `store`
/// as a runtime document. Throws EmptyCorpus, InvalidParams.
RetrievalResult retrieve_relevance(std::string_view query, const std::vector<RawDoc>& corpus,
                                   int k, DocStore& store,
                                   const std::set<std::size_t>& exclude = {});
/// Same ranking over documents already in a store; nothing is added.
RetrievalResult retrieve_relevance(std::string_view query, const DocStore& corpus, int k);

/// Throws UnknownDocId.
const Document& retrieve_index(const DocStore& store, int doc_id);

/// Asks the backend to recite `n` passages; each non-empty completion becomes
/// a runtime document. A refusal raises RetrievalRefused.
RetrievalResult retrieve_inner(std::string_view query, LLMBackend& backend, int n, DocStore& store,
                               const PromptTemplate& tpl, const GenParams& params = {});

// ------------------------------------------------------------------ planners

struct Plan {
  enum class Kind { blueprint_questions, span_clusters };
  Kind kind = Kind::blueprint_questions;
  std::vector<std::string> questions;
  std::vector<std::vector<SpanRef>> clusters;
};

inline constexpr std::size_t kMaxBlueprintQuestions = 4;

/// Sub-questions split on '?', at most four. Throws EmptyPlan.
Plan parse_blueprint(std::string_view completion);
/// "k." headers followed by "Document[i]: quote" lines. Throws UnparseablePlan.
Plan parse_attribution(std::string_view completion, const DocStore& store);

Plan plan_blueprint(std::string_view question, const DocStore& store, const std::vector<int>& doc_ids,
                    LLMBackend& backend, const PromptTemplate& tpl, const GenParams& params = {});
Plan plan_attribute(std::string_view question, const DocStore& store, const std::vector<int>& doc_ids,
                    LLMBackend& backend, const PromptTemplate& tpl, const GenParams& params = {});

/// "Document [i]: span text" lines of one cluster.
std::string render_cluster(const std::vector<SpanRef>& cluster, const DocStore& store);

// --------------------------------------------------------------- feedbackers

struct Feedback {
  enum class Kind { score, rerank_choice, verdict };
  Kind kind = Kind::score;
  double score = 0.0;
  std::size_t choice_idx = 0;
  bool verdict = false;
  std::string passthrough;
};

/// Fraction of statements whose citations jointly entail them.
Feedback feedback_score(const Answer& answer, Judge& judge, const DocStore& store);
/// Highest feedback_score wins; ties go to the lower index.
Feedback feedback_rerank(const std::vector<std::string>& candidates, Judge& judge,
                         const DocStore& store);
Feedback feedback_verify(const Statement& statement, const DocStore& store, Judge& judge);

// ------------------------------------------------------------------- editors

/// Re-prompts with {feedback} bound to `feedback`. An empty completion keeps
/// the original answer and appends a warning.
Answer edit_revise(const Answer& answer, const std::string& feedback, LLMBackend& backend,
                   const DocStore& store, const std::vector<int>& doc_ids, std::string_view question,
                   const PromptTemplate& tpl, const GenParams& params = {},
                   std::vector<std::string>* warnings = nullptr);

/// Drops citations in descending doc_id order while the rest still entails.
Statement edit_simplify(const Statement& statement, const DocStore& store, Judge& judge);
Answer edit_simplify(const Answer& answer, const DocStore& store, Judge& judge);

// ------------------------------------------------------------- node modules

enum class GenerationMode { direct, iterative };
std::string_view to_string(GenerationMode mode);

struct GeneratorConfig {
  PromptTemplate prompt;
  GenParams params;
  /// More than one candidate emits a list payload.
  int candidates = 1;
  GenerationMode mode = GenerationMode::direct;
};

/// Binds {question}, {docs} (the active documents), {prefix}, {feedback}
/// and {plan} (the input payload).
class GeneratorModule final : public Module {
public:
  explicit GeneratorModule(GeneratorConfig config);
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::generator; }
  std::string role() const override { return "generator"; }
  std::string describe() const override;
  const GeneratorConfig& config() const noexcept { return config_; }

private:
  GeneratorConfig config_;
};

struct RelevanceConfig {
  int k = 1;
  /// Skip corpus entries already in the store.
  bool exclude_present = true;
  /// Replace the active documents instead of extending them.
  bool replace_active = false;
  /// Query with the question rather than the input payload.
  bool query_question = false;
  /// Post-hoc mode: cite the top document of each uncited statement when the
  /// judge accepts it.
  bool posthoc = false;
};

class RelevanceRetrieverModule final : public Module {
public:
  explicit RelevanceRetrieverModule(RelevanceConfig config = {});
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::retriever; }
  std::string role() const override { return "relevance_retriever"; }
  std::string describe() const override;
  const RelevanceConfig& config() const noexcept { return config_; }

private:
  Payload run_posthoc(const Payload& input, RunContext& ctx);
  RelevanceConfig config_;
};

/// Action lines: "Check: Document [k]" swaps in document k's full text,
/// "Output: sentence" appends to the prefix, "End" (or nothing) finishes.
/// Emits empty text when finished.
class IndexRetrieverModule final : public Module {
public:
  explicit IndexRetrieverModule(std::string role = "index_retriever");
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::retriever; }
  std::string role() const override { return role_; }

private:
  std::string role_;
};

class InnerRetrieverModule final : public Module {
public:
  InnerRetrieverModule(int n, PromptTemplate prompt, GenParams params = {});
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::retriever; }
  std::string role() const override { return "inner_retriever"; }
  std::string describe() const override;
  int n() const noexcept { return n_; }
  const PromptTemplate& prompt() const noexcept { return prompt_; }
  const GenParams& params() const noexcept { return params_; }

private:
  int n_;
  PromptTemplate prompt_;
  GenParams params_;
};

/// Emits the sub-questions as one text.
class BlueprintModule final : public Module {
public:
  explicit BlueprintModule(PromptTemplate prompt, GenParams params = {});
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::planner; }
  std::string role() const override { return "blueprint"; }
  std::string describe() const override;
  const PromptTemplate& prompt() const noexcept { return prompt_; }
  const GenParams& params() const noexcept { return params_; }

private:
  PromptTemplate prompt_;
  GenParams params_;
};

/// Emits one rendered cluster per list element.
class AttributerModule final : public Module {
public:
  explicit AttributerModule(PromptTemplate prompt, GenParams params = {});
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::planner; }
  std::string role() const override { return "attributer"; }
  std::string describe() const override;
  const PromptTemplate& prompt() const noexcept { return prompt_; }
  const GenParams& params() const noexcept { return params_; }

private:
  PromptTemplate prompt_;
  GenParams params_;
};

/// Emits (text, score >= threshold) and stores a feedback note under "feedback".
class ScorerModule final : public Module {
public:
  explicit ScorerModule(double threshold = 1.0);
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::feedbacker; }
  std::string role() const override { return "scorer"; }
  std::string describe() const override;
  double threshold() const noexcept { return threshold_; }

private:
  double threshold_;
};

class RerankerModule final : public Module {
public:
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::feedbacker; }
  std::string role() const override { return "reranker"; }
};

/// Emits (text, every statement verified).
class VerifierModule final : public Module {
public:
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::feedbacker; }
  std::string role() const override { return "verifier"; }
};

class ReviserModule final : public Module {
public:
  explicit ReviserModule(PromptTemplate prompt, GenParams params = {});
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::editor; }
  std::string role() const override { return "reviser"; }
  std::string describe() const override;
  const PromptTemplate& prompt() const noexcept { return prompt_; }
  const GenParams& params() const noexcept { return params_; }

private:
  PromptTemplate prompt_;
  GenParams params_;
};

class SimplifierModule final : public Module {
public:
  Payload run(const Payload& input, RunContext& ctx) override;
  NodeKind kind() const override { return NodeKind::editor; }
  std::string role() const override { return "simplifier"; }
};

}  // namespace citekit
