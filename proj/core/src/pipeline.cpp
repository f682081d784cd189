#include "citekit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>
#include <thread>

#include "citekit/text.hpp"

namespace citekit {

namespace {

std::string join_nonempty(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + " " + b;
}

std::string payload_digest(const Payload& p) {
  std::string tag;
  if (std::holds_alternative<std::vector<std::string>>(p)) {
    for (const auto& item : std::get<std::vector<std::string>>(p)) tag += item + '\x1f';
  } else {
    tag = payload_text(p);
  }
  if (auto v = payload_verdict(p)) tag += *v ? "\x1e" "T" : "\x1e" "F";
  return text::digest(tag);
}

void apply_output_key(const ModuleNode& node, const std::string& out, RunContext& ctx) {
  if (node.output_key.empty()) return;
  const std::string text(text::trim(out));
  if (node.output_key == "prefix") {
    ctx.data["prefix"] = join_nonempty(ctx.data["prefix"], text);
  } else {
    ctx.data[node.output_key] = text;
  }
}

Payload execute(const ModuleNode& node, const Payload& in, RunContext& ctx) {
  std::vector<std::string> items;
  if (node.dispatch != Dispatch::single) {
    if (const auto* list = std::get_if<std::vector<std::string>>(&in)) {
      items = *list;
    } else {
      items.push_back(payload_text(in));
    }
  }

  switch (node.dispatch) {
    case Dispatch::single: {
      Payload out = node.module->run(in, ctx);
      apply_output_key(node, payload_text(out), ctx);
      return out;
    }
    case Dispatch::parallel: {
      std::vector<std::string> outs;
      outs.reserve(items.size());
      for (const auto& item : items) outs.push_back(payload_text(node.module->run(Payload{item}, ctx)));
      Payload out{outs};
      apply_output_key(node, payload_text(out), ctx);
      return out;
    }
    case Dispatch::iterative: {
      const std::string base = ctx.data["prefix"];
      std::string produced;
      for (const auto& item : items) {
        ctx.data["prefix"] = join_nonempty(base, produced);
        auto out = payload_text(node.module->run(Payload{item}, ctx));
        produced = join_nonempty(produced, std::string(text::trim(out)));
      }
      if (node.output_key == "prefix") {
        ctx.data["prefix"] = join_nonempty(base, produced);
      } else {
        ctx.data["prefix"] = base;
        apply_output_key(node, produced, ctx);
      }
      return Payload{produced};
    }
  }
  return in;
}

}  // namespace

std::string payload_text(const Payload& p) {
  if (const auto* s = std::get_if<std::string>(&p)) return *s;
  if (const auto* j = std::get_if<Judged>(&p)) return j->text;
  std::string out;
  for (const auto& item : std::get<std::vector<std::string>>(p)) out = join_nonempty(out, item);
  return out;
}

std::optional<bool> payload_verdict(const Payload& p) {
  if (const auto* j = std::get_if<Judged>(&p)) return j->verdict;
  return std::nullopt;
}

bool Condition::matches(const Payload& p, int turn) const {
  switch (kind) {
    case Kind::always: return true;
    case Kind::verdict_true: return payload_verdict(p) == std::optional<bool>(true);
    case Kind::verdict_false: return payload_verdict(p) == std::optional<bool>(false);
    case Kind::turn_lt: return turn < n;
    case Kind::text_empty: return text::trim(payload_text(p)).empty();
    case Kind::text_nonempty: return !text::trim(payload_text(p)).empty();
  }
  return false;
}

std::string Condition::to_string() const {
  switch (kind) {
    case Kind::always: return "always";
    case Kind::verdict_true: return "verdict_true";
    case Kind::verdict_false: return "verdict_false";
    case Kind::turn_lt: return "turn_lt(" + std::to_string(n) + ")";
    case Kind::text_empty: return "text_empty";
    case Kind::text_nonempty: return "text_nonempty";
  }
  return "always";
}

Condition Condition::parse(std::string_view s) {
  const auto t = text::trim(s);
  if (t == "always") return always();
  if (t == "verdict_true") return verdict_true();
  if (t == "verdict_false") return verdict_false();
  if (t == "text_empty") return text_empty();
  if (t == "text_nonempty") return text_nonempty();
  if (t.rfind("turn_lt(", 0) == 0 && t.back() == ')') {
    const std::string num(t.substr(8, t.size() - 9));
    if (!num.empty() && std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        num.size() < 9) {
      return turn_lt(std::stoi(num));
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unknown condition '" + std::string(t) + "'");
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::generator: return "generator";
    case NodeKind::retriever: return "retriever";
    case NodeKind::planner: return "planner";
    case NodeKind::feedbacker: return "feedbacker";
    case NodeKind::editor: return "editor";
    case NodeKind::evaluator_sink: return "evaluator_sink";
    case NodeKind::output_sink: return "output_sink";
  }
  return "?";
}

std::string_view to_string(Dispatch dispatch) {
  switch (dispatch) {
    case Dispatch::single: return "single";
    case Dispatch::parallel: return "parallel";
    case Dispatch::iterative: return "iterative";
  }
  return "?";
}

Dispatch parse_dispatch(std::string_view s) {
  if (s == "single") return Dispatch::single;
  if (s == "parallel") return Dispatch::parallel;
  if (s == "iterative") return Dispatch::iterative;
  throw Error(ErrorKind::InvalidConfig, "unknown dispatch '" + std::string(s) + "'");
}

LLMBackend& RunContext::llm() const {
  if (backend == nullptr) throw Error(ErrorKind::BackendUnavailable, "no backend configured");
  return *backend;
}

Judge& RunContext::entailment() const {
  if (judge == nullptr) throw Error(ErrorKind::JudgeUnavailable, "no judge configured");
  return *judge;
}

PipelineGraph& PipelineGraph::add_node(ModuleNode node) {
  if (node.node_id.empty()) throw Error(ErrorKind::InvalidGraph, "node id must not be empty");
  if (node.node_id == kOutputNode || has_node(node.node_id)) {
    throw Error(ErrorKind::DuplicateNodeId, "duplicate node id '" + node.node_id + "'");
  }
  if (entry_.empty()) entry_ = node.node_id;
  nodes_.push_back(std::move(node));
  return *this;
}

PipelineGraph& PipelineGraph::set_target(std::string_view from, Condition condition, std::string_view to) {
  if (to != kOutputNode && !has_node(to)) {
    throw Error(ErrorKind::UnknownNode, "unknown target node '" + std::string(to) + "'");
  }
  node(from).targets.push_back({condition, std::string(to)});
  return *this;
}

void PipelineGraph::reset_targets(std::string_view from) { node(from).targets.clear(); }

bool PipelineGraph::has_node(std::string_view id) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const ModuleNode& n) { return n.node_id == id; });
}

const ModuleNode& PipelineGraph::node(std::string_view id) const {
  for (const auto& n : nodes_) {
    if (n.node_id == id) return n;
  }
  throw Error(ErrorKind::UnknownNode, "unknown node '" + std::string(id) + "'");
}

ModuleNode& PipelineGraph::node(std::string_view id) {
  return const_cast<ModuleNode&>(std::as_const(*this).node(id));
}

void PipelineGraph::validate() const {
  if (nodes_.empty()) throw Error(ErrorKind::InvalidGraph, "graph has no nodes");
  if (!has_node(entry_)) throw Error(ErrorKind::InvalidGraph, "entry '" + entry_ + "' does not exist");
  if (max_total_steps <= 0) throw Error(ErrorKind::InvalidGraph, "max_total_steps must be positive");
  for (const auto& n : nodes_) {
    if (!n.module) throw Error(ErrorKind::InvalidGraph, "node '" + n.node_id + "' has no module");
    for (const auto& t : n.targets) {
      if (t.node_id != kOutputNode && !has_node(t.node_id)) {
        throw Error(ErrorKind::InvalidGraph,
                    "node '" + n.node_id + "' targets unknown node '" + t.node_id + "'");
      }
      if (t.condition.kind == Condition::Kind::turn_lt && t.condition.n < 0) {
        throw Error(ErrorKind::InvalidGraph, "node '" + n.node_id + "' has a negative turn bound");
      }
    }
  }
}

std::vector<std::string> PipelineGraph::lint() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    bool unconditional = false;
    for (std::size_t i = 0; i < n.targets.size(); ++i) {
      const auto& t = n.targets[i];
      if (unconditional) {
        out.push_back("node '" + n.node_id + "': target " + std::to_string(i) + " (" +
                      t.condition.to_string() + " -> " + t.node_id +
                      ") is unreachable after an unconditional target");
      }
      if (t.condition.kind == Condition::Kind::always) unconditional = true;
    }
  }

  std::set<std::string> seen;
  std::vector<std::string> frontier;
  if (has_node(entry_)) frontier.push_back(entry_);
  while (!frontier.empty()) {
    auto id = frontier.back();
    frontier.pop_back();
    if (!seen.insert(id).second) continue;
    for (const auto& t : node(id).targets) {
      if (t.node_id != kOutputNode) frontier.push_back(t.node_id);
    }
  }
  for (const auto& n : nodes_) {
    if (!seen.count(n.node_id)) out.push_back("node '" + n.node_id + "' is unreachable from the entry");
  }
  return out;
}

std::string PipelineGraph::signature() const {
  std::vector<const ModuleNode*> sorted;
  for (const auto& n : nodes_) sorted.push_back(&n);
  std::sort(sorted.begin(), sorted.end(),
            [](const ModuleNode* a, const ModuleNode* b) { return a->node_id < b->node_id; });
  std::ostringstream os;
  os << "entry=" << entry_ << ";steps=" << max_total_steps << ";answer_key=" << answer_key
     << ";answer_view=" << to_string(answer_view) << "\n";
  for (const auto* n : sorted) {
    os << n->node_id << "|" << to_string(n->kind()) << "|" << (n->module ? n->module->describe() : "")
       << "|" << to_string(n->dispatch) << "|" << n->output_key << "|";
    for (const auto& t : n->targets) os << t.condition.to_string() << "->" << t.node_id << ";";
    os << "\n";
  }
  return os.str();
}

PipelineGraph build_sequence(std::vector<ModuleNode> nodes) {
  if (nodes.empty()) throw Error(ErrorKind::InvalidGraph, "sequence needs at least one node");
  PipelineGraph graph;
  std::vector<std::string> ids;
  for (auto& n : nodes) {
    ids.push_back(n.node_id);
    graph.add_node(std::move(n));
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::string next = i + 1 < ids.size() ? ids[i + 1] : std::string(kOutputNode);
    graph.set_target(ids[i], Condition::always(), next);
  }
  return graph;
}

ItemOutcome run_item(const PipelineGraph& graph, const DatasetRecord& record,
                     const LLMBackend& backend, const Judge& judge, const RunOptions& options) {
  graph.validate();

  auto llm = backend.fork();
  auto nli = judge.fork();

  RunContext ctx;
  ctx.question = record.question;
  ctx.backend = llm.get();
  ctx.judge = nli.get();
  if (options.top_n > 0) {
    ctx.store = bind_record(record, options.init_docs_key, options.top_n).store;
  }
  ctx.active_docs = ctx.store.ids();

  const std::string corpus_key = options.corpus_key.empty() ? options.init_docs_key : options.corpus_key;
  if (options.external_corpus) {
    ctx.corpus = *options.external_corpus;
  } else if (const auto* docs = record.docs(corpus_key)) {
    ctx.corpus = *docs;
    if (corpus_key == options.init_docs_key) {
      const std::size_t bound = std::min(options.top_n, docs->size());
      for (std::size_t i = 0; i < bound; ++i) ctx.corpus_ids[i] = static_cast<int>(i) + 1;
    }
  }

  RunTrace trace;
  std::map<std::string, int> visits;
  std::string current = graph.entry();
  Payload payload{record.question};

  while (current != kOutputNode) {
    if (static_cast<int>(trace.steps.size()) >= graph.max_total_steps) {
      throw StepBudgetExhaustedError(graph.max_total_steps, std::move(trace));
    }
    const ModuleNode& node = graph.node(current);
    const int turn = ++visits[current];

    Payload out;
    try {
      out = execute(node, payload, ctx);
    } catch (const StepBudgetExhaustedError&) {
      throw;
    } catch (const Error& e) {
      throw NodeFailureError(node.node_id, e.what(), e.kind());
    } catch (const std::exception& e) {
      throw NodeFailureError(node.node_id, e.what(), ErrorKind::NodeFailure);
    }
    trace.steps.push_back({node.node_id, payload_digest(payload), payload_digest(out), turn});

    std::string next(kOutputNode);
    for (const auto& t : node.targets) {
      if (t.condition.matches(out, turn)) {
        next = t.node_id;
        break;
      }
    }
    payload = std::move(out);
    current = std::move(next);
  }

  const std::string final_text =
      graph.answer_key.empty() ? payload_text(payload) : ctx.data[graph.answer_key];
  ItemOutcome outcome;
  outcome.answer = parse_answer(text::trim(final_text));
  scope_citations(outcome.answer, ctx.store, graph.answer_view);

  trace.final_answer = outcome.answer.full_text;
  for (const auto& [id, doc] : ctx.store) {
    if (doc.origin == DocOrigin::retrieved_runtime) trace.runtime_doc_ids.push_back(id);
  }
  for (const auto& prompt : ctx.prompt_log) trace.prompt_digests.push_back(text::digest(prompt));

  outcome.trace = std::move(trace);
  outcome.store = std::move(ctx.store);
  outcome.warnings = std::move(ctx.warnings);
  return outcome;
}

std::vector<ItemResult> run_on_dataset(const PipelineGraph& graph, const Dataset& dataset,
                                       const LLMBackend& backend, const Judge& judge,
                                       const ItemScorer& scorer, const RunOptions& options) {
  if (dataset.records.empty()) throw Error(ErrorKind::EmptyDataset, dataset.name + " has no records");
  if (options.workers < 1) throw Error(ErrorKind::InvalidConfig, "workers must be >= 1");
  graph.validate();

  std::vector<ItemResult> results(dataset.records.size());
  auto process = [&](std::size_t i) {
    const auto& record = dataset.records[i];
    ItemResult& r = results[i];
    r.index = i;
    r.question = record.question;
    try {
      auto outcome = run_item(graph, record, backend, judge, options);
      r.ok = true;
      r.answer = std::move(outcome.answer);
      r.trace = std::move(outcome.trace);
      r.store = std::move(outcome.store);
      r.warnings = std::move(outcome.warnings);
    } catch (const StepBudgetExhaustedError& e) {
      r.error_kind = e.kind();
      r.error = e.what();
      r.trace = e.trace();
    } catch (const NodeFailureError& e) {
      r.error_kind = e.kind();
      r.error = e.what();
      r.failed_node = e.node_id();
    } catch (const Error& e) {
      r.error_kind = e.kind();
      r.error = e.what();
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    if (r.ok && scorer) {
      try {
        r.metrics = scorer(r, record);
      } catch (const std::exception& e) {
        r.warnings.push_back(std::string("scoring failed: ") + e.what());
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(options.workers), dataset.records.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < results.size(); ++i) process(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < results.size(); i = next++) process(i);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

std::map<std::string, double> aggregate_metrics(const std::vector<ItemResult>& results) {
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : results) {
    if (!r.ok) continue;
    for (const auto& [name, value] : r.metrics) {
      auto& [sum, count] = sums[name];
      if (value) {
        sum += *value;
        ++count;
      }
    }
  }
  std::map<std::string, double> out;
  for (const auto& [name, sc] : sums) {
    if (sc.second > 0) out[name] = sc.first / static_cast<double>(sc.second);
  }
  return out;
}

}  // namespace citekit
