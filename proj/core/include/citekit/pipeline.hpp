#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "citekit/dataset.hpp"
#include "citekit/document.hpp"
#include "citekit/error.hpp"
#include "citekit/judge.hpp"
#include "citekit/llm.hpp"

namespace citekit {

/// Output of a feedbacker: the evaluated text plus its verdict.
struct Judged {
  std::string text;
  bool verdict = false;
  friend bool operator==(const Judged&, const Judged&) = default;
};

/// What travels along an edge.
using Payload = std::variant<std::string, std::vector<std::string>, Judged>;

/// List payloads join with single spaces.
std::string payload_text(const Payload& p);
std::optional<bool> payload_verdict(const Payload& p);

struct Condition {
  enum class Kind { always, verdict_true, verdict_false, turn_lt, text_empty, text_nonempty };
  Kind kind = Kind::always;
  int n = 0;  // turn_lt bound

  static Condition always() { return {Kind::always, 0}; }
  static Condition verdict_true() { return {Kind::verdict_true, 0}; }
  static Condition verdict_false() { return {Kind::verdict_false, 0}; }
  static Condition turn_lt(int n) { return {Kind::turn_lt, n}; }
  static Condition text_empty() { return {Kind::text_empty, 0}; }
  static Condition text_nonempty() { return {Kind::text_nonempty, 0}; }

  /// `turn` is the 1-based visit count of the node that produced `p`.
  bool matches(const Payload& p, int turn) const;

  std::string to_string() const;
  /// Inverse of to_string: "always", "turn_lt(3)", ... Throws InvalidConfig.
  static Condition parse(std::string_view s);

  friend bool operator==(const Condition&, const Condition&) = default;
};

enum class NodeKind { generator, retriever, planner, feedbacker, editor, evaluator_sink, output_sink };
enum class Dispatch { single, parallel, iterative };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Dispatch dispatch);
Dispatch parse_dispatch(std::string_view s);

/// Per-item mutable state shared by the nodes of one run.
struct RunContext {
  std::string question;
  DocStore store;
  /// Documents rendered into {docs}, in order.
  std::vector<int> active_docs;
  /// Per-document view overrides (an Interact "check" swaps in the full text).
  std::map<int, DocView> view_overrides;
  /// Retrieval corpus for this item and the store id each entry received.
  std::vector<RawDoc> corpus;
  std::map<std::size_t, int> corpus_ids;
  /// Named intermediate values: "prefix", "feedback", ...
  std::map<std::string, std::string> data;
  LLMBackend* backend = nullptr;
  Judge* judge = nullptr;
  std::vector<std::string> warnings;
  std::vector<std::string> prompt_log;

  LLMBackend& llm() const;
  Judge& entailment() const;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

/// Anything a node can run.
class Module {
public:
  virtual ~Module() = default;

  virtual Payload run(const Payload& input, RunContext& ctx) = 0;
  virtual NodeKind kind() const = 0;
  /// Enhancer kind ("verifier", "attributer", ...) or "generator".
  virtual std::string role() const = 0;
  /// Stable one-line description of the configuration, used in signatures.
  virtual std::string describe() const { return role(); }
};

inline constexpr std::string_view kOutputNode = "output";

struct Target {
  Condition condition;
  std::string node_id;
  friend bool operator==(const Target&, const Target&) = default;
};

struct ModuleNode {
  std::string node_id;
  std::shared_ptr<Module> module;
  std::vector<Target> targets;
  Dispatch dispatch = Dispatch::single;
  /// "prefix" appends the node output to data["prefix"]; any other non-empty
  /// key stores it under that name.
  std::string output_key;

  NodeKind kind() const { return module ? module->kind() : NodeKind::output_sink; }
};

inline constexpr int kDefaultStepBudget = 24;

class PipelineGraph {
public:
  PipelineGraph() = default;

  /// Throws DuplicateNodeId. The first node added becomes the entry.
  PipelineGraph& add_node(ModuleNode node);
  /// Appends a target. Throws UnknownNode. A target placed after an
  /// unconditional one is unreachable and is reported by lint().
  PipelineGraph& set_target(std::string_view from, Condition condition, std::string_view to);
  void reset_targets(std::string_view from);

  void set_entry(std::string entry) { entry_ = std::move(entry); }
  const std::string& entry() const noexcept { return entry_; }

  bool has_node(std::string_view id) const;
  const ModuleNode& node(std::string_view id) const;  // throws UnknownNode
  ModuleNode& node(std::string_view id);
  const std::vector<ModuleNode>& nodes() const noexcept { return nodes_; }

  int max_total_steps = kDefaultStepBudget;
  /// Where the final answer text comes from: empty = the payload reaching the
  /// output sink, otherwise data[answer_key].
  std::string answer_key;
  /// View used to scope citations once the answer is final.
  DocView answer_view = DocView::full;

  /// Throws InvalidGraph.
  void validate() const;
  /// Non-fatal findings such as unreachable targets or orphaned nodes.
  std::vector<std::string> lint() const;
  /// Canonical text form; equal signatures mean isomorphic graphs.
  std::string signature() const;

private:
  std::vector<ModuleNode> nodes_;
  std::string entry_;
};

/// Chains nodes with catch-all targets; the last node targets the output sink.
PipelineGraph build_sequence(std::vector<ModuleNode> nodes);

struct TraceStep {
  std::string node_id;
  std::string input_digest;
  std::string output_digest;
  int turn = 0;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct RunTrace {
  std::vector<TraceStep> steps;
  std::string final_answer;
  std::vector<int> runtime_doc_ids;
  std::vector<std::string> prompt_digests;
};

class StepBudgetExhaustedError : public Error {
public:
  StepBudgetExhaustedError(int budget, RunTrace trace)
      : Error(ErrorKind::StepBudgetExhausted,
              "step budget of " + std::to_string(budget) + " exhausted"),
        trace_(std::move(trace)) {}
  const RunTrace& trace() const noexcept { return trace_; }

private:
  RunTrace trace_;
};

struct RunOptions {
  std::string init_docs_key = "docs";
  std::size_t top_n = kDefaultTopDocs;
  /// Record field searched by runtime retrievers; empty uses init_docs_key.
  std::string corpus_key;
  /// Replaces the record's documents as retrieval corpus when set.
  std::optional<std::vector<RawDoc>> external_corpus;
  int workers = 1;
};

struct ItemOutcome {
  Answer answer;
  RunTrace trace;
  DocStore store;
  std::vector<std::string> warnings;
};

using MetricValues = std::map<std::string, std::optional<double>>;

struct ItemResult {
  std::size_t index = 0;
  std::string question;
  bool ok = false;
  std::optional<ErrorKind> error_kind;
  std::string error;
  std::string failed_node;
  Answer answer;
  RunTrace trace;
  DocStore store;
  std::vector<std::string> warnings;
  MetricValues metrics;
};

/// Runs one record. Throws NodeFailureError or StepBudgetExhaustedError.
ItemOutcome run_item(const PipelineGraph& graph, const DatasetRecord& record,
                     const LLMBackend& backend, const Judge& judge, const RunOptions& options = {});

using ItemScorer = std::function<MetricValues(const ItemResult&, const DatasetRecord&)>;

/// Items run on `options.workers` threads with fresh stores and forked
/// backend/judge instances; results come back in dataset order.
std::vector<ItemResult> run_on_dataset(const PipelineGraph& graph, const Dataset& dataset,
                                       const LLMBackend& backend, const Judge& judge,
                                       const ItemScorer& scorer = {}, const RunOptions& options = {});

/// Item-order arithmetic mean over defined values.
std::map<std::string, double> aggregate_metrics(const std::vector<ItemResult>& results);

}  // namespace citekit
