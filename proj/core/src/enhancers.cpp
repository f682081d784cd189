#include "citekit/enhancers.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "citekit/error.hpp"
#include "citekit/text.hpp"

namespace citekit {

namespace {

std::vector<std::pair<std::size_t, double>> top_positive(const Bm25& bm, std::string_view query,
                                                         int k, const std::set<std::size_t>& exclude) {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& hit : bm.rank(query)) {
    if (static_cast<int>(out.size()) >= k) break;
    if (hit.second <= 0.0) break;
    if (exclude.count(hit.first)) continue;
    out.push_back(hit);
  }
  return out;
}

Bm25 index_corpus(const std::vector<RawDoc>& corpus) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& d : corpus) texts.push_back(indexed_text(d));
  return Bm25(texts);
}

/// Store id for corpus entry `idx`, adding it on first use.
int materialize(RunContext& ctx, std::size_t idx) {
  auto it = ctx.corpus_ids.find(idx);
  if (it != ctx.corpus_ids.end() && ctx.store.contains(it->second)) return it->second;
  const int id = ctx.store.add(to_document(ctx.corpus.at(idx), DocOrigin::retrieved_runtime));
  ctx.corpus_ids[idx] = id;
  return id;
}

std::string unquote(std::string_view s) {
  auto t = text::trim(s);
  if (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') || (t.front() == '\'' && t.back() == '\''))) {
    t = text::trim(t.substr(1, t.size() - 2));
  }
  return std::string(t);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

void log_prompt(RunContext& ctx, const PromptTemplate& tpl, const Bindings& bindings) {
  auto rendered = render_prompt(tpl, bindings, ctx.store, ctx.active_docs, ctx.view_overrides);
  for (int id : rendered.fallback_doc_ids) {
    std::string w = "document [" + std::to_string(id) + "] has no " +
                    std::string(to_string(tpl.doc_render())) + " view; rendered full text";
    if (std::find(ctx.warnings.begin(), ctx.warnings.end(), w) == ctx.warnings.end()) ctx.warn(w);
  }
  ctx.prompt_log.push_back(std::move(rendered.text));
}

Bindings base_bindings(const RunContext& ctx, const Payload& input) {
  auto get = [&](const char* key) {
    auto it = ctx.data.find(key);
    return it == ctx.data.end() ? std::string() : it->second;
  };
  return {{"question", ctx.question},
          {"prefix", get("prefix")},
          {"feedback", get("feedback")},
          {"plan", payload_text(input)}};
}

std::string describe_prompt(const PromptTemplate& tpl, const GenParams& params) {
  std::ostringstream os;
  os << "prompt=" << text::digest(tpl.body()) << " view=" << to_string(tpl.doc_render())
     << " max_tokens=" << params.max_new_tokens << " temperature=" << params.temperature
     << " stop=" << text::digest(join(params.stop, "\x1f"));
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- retrievers

Bm25::Bm25(const std::vector<std::string>& documents) {
  tf_.reserve(documents.size());
  std::size_t total = 0;
  for (const auto& doc : documents) {
    std::unordered_map<std::string, int> counts;
    const auto tokens = text::word_tokens(doc);
    for (const auto& t : tokens) ++counts[t];
    for (const auto& [term, _] : counts) ++df_[term];
    lengths_.push_back(tokens.size());
    total += tokens.size();
    tf_.push_back(std::move(counts));
  }
  avg_len_ = documents.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(documents.size());
}

double Bm25::idf(const std::string& term) const {
  auto it = df_.find(term);
  const double n = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  const double N = static_cast<double>(lengths_.size());
  return std::log(1.0 + (N - n + 0.5) / (n + 0.5));
}

double Bm25::score_tokens(std::size_t doc, const std::vector<std::string>& query) const {
  const auto& counts = tf_.at(doc);
  const double norm = avg_len_ > 0.0 ? static_cast<double>(lengths_[doc]) / avg_len_ : 1.0;
  double s = 0.0;
  for (const auto& term : query) {
    auto it = counts.find(term);
    if (it == counts.end()) continue;
    const double tf = it->second;
    s += idf(term) * tf * (kK1 + 1.0) / (tf + kK1 * (1.0 - kB + kB * norm));
  }
  return s;
}

double Bm25::score(std::size_t doc, std::string_view query) const {
  return score_tokens(doc, text::word_tokens(query));
}

std::vector<std::pair<std::size_t, double>> Bm25::rank(std::string_view query) const {
  const auto tokens = text::word_tokens(query);
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(tf_.size());
  for (std::size_t i = 0; i < tf_.size(); ++i) out.emplace_back(i, score_tokens(i, tokens));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::string indexed_text(const RawDoc& doc) { return doc.title + "\n" + doc.text; }
std::string indexed_text(const Document& doc) { return doc.title + "\n" + doc.text; }

RetrievalResult retrieve_relevance(std::string_view query, const std::vector<RawDoc>& corpus, int k,
                                   DocStore& store, const std::set<std::size_t>& exclude) {
  if (k < 1) throw Error(ErrorKind::InvalidParams, "k must be >= 1");
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "retrieval corpus is empty");
  RetrievalResult result;
  for (const auto& [idx, score] : top_positive(index_corpus(corpus), query, k, exclude)) {
    Document doc = to_document(corpus[idx], DocOrigin::retrieved_runtime);
    const int id = store.add(doc);
    result.docs.push_back(store.get(id));
    result.scores.push_back(score);
    result.doc_ids.push_back(id);
    result.corpus_indices.push_back(idx);
  }
  return result;
}

RetrievalResult retrieve_relevance(std::string_view query, const DocStore& corpus, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidParams, "k must be >= 1");
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "retrieval corpus is empty");
  std::vector<std::string> texts;
  std::vector<int> ids;
  for (const auto& [id, doc] : corpus) {
    ids.push_back(id);
    texts.push_back(indexed_text(doc));
  }
  RetrievalResult result;
  for (const auto& [idx, score] : top_positive(Bm25(texts), query, k, {})) {
    result.docs.push_back(corpus.get(ids[idx]));
    result.scores.push_back(score);
    result.doc_ids.push_back(ids[idx]);
  }
  return result;
}

const Document& retrieve_index(const DocStore& store, int doc_id) { return store.get(doc_id); }

RetrievalResult retrieve_inner(std::string_view query, LLMBackend& backend, int n, DocStore& store,
                               const PromptTemplate& tpl, const GenParams& params) {
  if (n < 1) throw Error(ErrorKind::InvalidParams, "n must be >= 1");
  const auto prompt = render_prompt(tpl, {{"question", std::string(query)}, {"prefix", ""},
                                          {"feedback", ""}, {"plan", std::string(query)}},
                                    store, {});
  RetrievalResult result;
  for (int i = 0; i < n; ++i) {
    Completion c;
    try {
      c = backend.generate(prompt.text, params);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::BackendRefusal) throw Error(ErrorKind::RetrievalRefused, e.detail());
      throw;
    }
    const auto passage = text::trim(c.text);
    if (passage.empty()) continue;
    const int id = store.add(make_document("Recitation " + std::to_string(i + 1), std::string(passage),
                                           std::nullopt, std::nullopt, DocOrigin::retrieved_runtime));
    result.docs.push_back(store.get(id));
    result.scores.push_back(1.0);
    result.doc_ids.push_back(id);
  }
  return result;
}

// ------------------------------------------------------------------ planners

Plan parse_blueprint(std::string_view completion) {
  static const std::regex label(R"(^\s*sub-?questions?\s*:\s*)", std::regex::icase);
  Plan plan;
  plan.kind = Plan::Kind::blueprint_questions;
  std::size_t start = 0;
  for (std::size_t i = 0; i < completion.size(); ++i) {
    if (completion[i] != '?') continue;
    std::string q(text::trim(completion.substr(start, i + 1 - start)));
    start = i + 1;
    q = std::regex_replace(q, label, "");
    q = text::normalize_whitespace(q);
    if (text::word_tokens(q).empty()) continue;
    plan.questions.push_back(std::move(q));
    if (plan.questions.size() == kMaxBlueprintQuestions) break;
  }
  if (plan.questions.empty()) throw Error(ErrorKind::EmptyPlan, "no sub-question found");
  return plan;
}

Plan parse_attribution(std::string_view completion, const DocStore& store) {
  static const std::regex header(R"(^\s*(\d+)\.\s*(.*)$)");
  static const std::regex doc_line(R"(^\s*Document\s*\[(\d{1,9})\]\s*:?\s*(.*)$)", std::regex::icase);

  struct Quote {
    int doc_id;
    std::string text;
  };
  std::vector<std::vector<Quote>> raw_clusters;
  std::stringstream lines{std::string(completion)};
  std::string line;
  bool saw_header = false;
  while (std::getline(lines, line)) {
    std::smatch m;
    std::string rest;
    bool is_header = false;
    if (std::regex_match(line, m, header)) {
      rest = m[2].str();
      const auto t = text::trim(rest);
      is_header = t.empty() || std::regex_match(rest, doc_line);
    }
    if (is_header) {
      saw_header = true;
      raw_clusters.emplace_back();
      line = rest;
    }
    if (raw_clusters.empty()) continue;
    if (std::regex_match(line, m, doc_line)) {
      raw_clusters.back().push_back({std::stoi(m[1].str()), m[2].str()});
    } else if (!raw_clusters.back().empty()) {
      auto& q = raw_clusters.back().back().text;
      q += " ";
      q += line;
    }
  }
  if (!saw_header) throw Error(ErrorKind::UnparseablePlan, "no cluster headers in attribution");

  Plan plan;
  plan.kind = Plan::Kind::span_clusters;
  for (const auto& quotes : raw_clusters) {
    std::vector<SpanRef> cluster;
    for (const auto& q : quotes) {
      const Document* doc = store.find(q.doc_id);
      if (doc == nullptr) continue;
      std::string cleaned = q.text;
      for (const char* ellipsis : {"...", "\xE2\x80\xA6"}) {
        for (auto pos = cleaned.find(ellipsis); pos != std::string::npos; pos = cleaned.find(ellipsis)) {
          cleaned.replace(pos, std::string_view(ellipsis).size(), " ");
        }
      }
      for (const auto& r : split_sentences(cleaned)) {
        auto span = match_span(*doc, std::string_view(cleaned).substr(r.begin, r.size()));
        if (span && std::find(cluster.begin(), cluster.end(), *span) == cluster.end()) {
          cluster.push_back(*span);
        }
      }
    }
    if (!cluster.empty()) plan.clusters.push_back(std::move(cluster));
  }
  if (plan.clusters.empty()) {
    throw Error(ErrorKind::UnparseablePlan, "no attributed span matched a stored document");
  }
  return plan;
}

Plan plan_blueprint(std::string_view question, const DocStore& store, const std::vector<int>& doc_ids,
                    LLMBackend& backend, const PromptTemplate& tpl, const GenParams& params) {
  if (store.empty()) throw Error(ErrorKind::EmptyPlan, "no documents to plan from");
  const auto prompt = render_prompt(
      tpl, {{"question", std::string(question)}, {"prefix", ""}, {"feedback", ""}, {"plan", ""}}, store,
      doc_ids);
  return parse_blueprint(backend.generate(prompt.text, params).text);
}

Plan plan_attribute(std::string_view question, const DocStore& store, const std::vector<int>& doc_ids,
                    LLMBackend& backend, const PromptTemplate& tpl, const GenParams& params) {
  if (store.empty()) throw Error(ErrorKind::UnparseablePlan, "no documents to attribute");
  const auto prompt = render_prompt(
      tpl, {{"question", std::string(question)}, {"prefix", ""}, {"feedback", ""}, {"plan", ""}}, store,
      doc_ids);
  return parse_attribution(backend.generate(prompt.text, params).text, store);
}

std::string render_cluster(const std::vector<SpanRef>& cluster, const DocStore& store) {
  std::string out;
  for (const auto& span : cluster) {
    const Document* doc = store.find(span.doc_id);
    if (doc == nullptr) continue;
    if (!out.empty()) out.push_back('\n');
    out += "Document [" + std::to_string(span.doc_id) + "]: ";
    out.append(doc->span_text(span));
  }
  return out;
}

// --------------------------------------------------------------- feedbackers

Feedback feedback_score(const Answer& answer, Judge& judge, const DocStore& store) {
  Feedback fb;
  fb.kind = Feedback::Kind::score;
  fb.passthrough = answer.full_text;
  if (answer.statements.empty()) return fb;
  std::size_t entailed = 0;
  for (const auto& st : answer.statements) {
    if (citations_entail(judge, st.citations, store, st.text)) ++entailed;
  }
  fb.score = static_cast<double>(entailed) / static_cast<double>(answer.statements.size());
  return fb;
}

Feedback feedback_rerank(const std::vector<std::string>& candidates, Judge& judge, const DocStore& store) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidParams, "reranking needs at least one candidate");
  Feedback fb;
  fb.kind = Feedback::Kind::rerank_choice;
  double best = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double s = feedback_score(parse_answer(candidates[i]), judge, store).score;
    if (s > best) {
      best = s;
      fb.choice_idx = i;
    }
  }
  fb.score = best;
  fb.passthrough = candidates[fb.choice_idx];
  return fb;
}

Feedback feedback_verify(const Statement& statement, const DocStore& store, Judge& judge) {
  Feedback fb;
  fb.kind = Feedback::Kind::verdict;
  fb.verdict = citations_entail(judge, statement.citations, store, statement.text);
  fb.passthrough = statement.raw;
  return fb;
}

// ------------------------------------------------------------------- editors

Answer edit_revise(const Answer& answer, const std::string& feedback, LLMBackend& backend,
                   const DocStore& store, const std::vector<int>& doc_ids, std::string_view question,
                   const PromptTemplate& tpl, const GenParams& params, std::vector<std::string>* warnings) {
  const auto prompt = render_prompt(tpl,
                                    {{"question", std::string(question)},
                                     {"prefix", ""},
                                     {"feedback", feedback},
                                     {"plan", answer.full_text}},
                                    store, doc_ids);
  const std::string revised(text::trim(backend.generate(prompt.text, params).text));
  if (revised.empty()) {
    if (warnings != nullptr) warnings->push_back("reviser returned nothing; kept the original answer");
    return answer;
  }
  return parse_answer(revised);
}

Statement edit_simplify(const Statement& statement, const DocStore& store, Judge& judge) {
  if (statement.citations.empty()) return statement;
  if (!citations_entail(judge, statement.citations, store, statement.text)) return statement;

  std::vector<Citation> kept = statement.citations;
  std::vector<int> order = statement.cited_doc_ids();
  std::sort(order.begin(), order.end(), std::greater<>());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (int id : order) {
    std::vector<Citation> trial;
    for (const auto& c : kept) {
      if (c.doc_id != id) trial.push_back(c);
    }
    if (trial.size() == kept.size() || trial.empty()) continue;
    if (citations_entail(judge, trial, store, statement.text)) kept = std::move(trial);
  }

  Statement out = statement;
  out.citations = std::move(kept);
  out.raw = render_statement(out);
  return out;
}

Answer edit_simplify(const Answer& answer, const DocStore& store, Judge& judge) {
  Answer out = answer;
  for (auto& st : out.statements) st = edit_simplify(st, store, judge);
  out.full_text = render_answer(out);
  return out;
}

// ------------------------------------------------------------- node modules

std::string_view to_string(GenerationMode mode) {
  return mode == GenerationMode::iterative ? "iterative" : "direct";
}

GeneratorModule::GeneratorModule(GeneratorConfig config) : config_(std::move(config)) {
  config_.params.validate();
  if (config_.candidates < 1) throw Error(ErrorKind::InvalidParams, "candidates must be >= 1");
  if (config_.mode == GenerationMode::iterative && !config_.prompt.uses("prefix")) {
    throw Error(ErrorKind::InvalidTemplate, "iterative generation needs a {prefix} placeholder");
  }
}

Payload GeneratorModule::run(const Payload& input, RunContext& ctx) {
  const auto bindings = base_bindings(ctx, input);
  log_prompt(ctx, config_.prompt, bindings);
  const std::string& prompt = ctx.prompt_log.back();
  std::vector<std::string> outs;
  for (int i = 0; i < config_.candidates; ++i) {
    outs.emplace_back(text::trim(ctx.llm().generate(prompt, config_.params).text));
  }
  if (config_.candidates == 1) return Payload{outs.front()};
  return Payload{outs};
}

std::string GeneratorModule::describe() const {
  std::ostringstream os;
  os << "generator mode=" << to_string(config_.mode) << " candidates=" << config_.candidates << " "
     << describe_prompt(config_.prompt, config_.params);
  return os.str();
}

RelevanceRetrieverModule::RelevanceRetrieverModule(RelevanceConfig config) : config_(config) {
  if (config_.k < 1) throw Error(ErrorKind::InvalidParams, "k must be >= 1");
}

Payload RelevanceRetrieverModule::run(const Payload& input, RunContext& ctx) {
  if (config_.posthoc) return run_posthoc(input, ctx);
  if (ctx.corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "no retrieval corpus for this item");

  std::string query = config_.query_question ? ctx.question : unquote(payload_text(input));
  if (text::word_tokens(query).empty()) query = ctx.question;

  std::set<std::size_t> exclude;
  if (config_.exclude_present) {
    for (const auto& [idx, id] : ctx.corpus_ids) {
      if (ctx.store.contains(id)) exclude.insert(idx);
    }
  }
  std::vector<int> ids;
  for (const auto& [idx, score] : top_positive(index_corpus(ctx.corpus), query, config_.k, exclude)) {
    ids.push_back(materialize(ctx, idx));
  }
  if (ids.empty()) ctx.warn("retrieval for '" + query + "' found nothing");
  if (config_.replace_active) {
    ctx.active_docs = ids;
  } else {
    for (int id : ids) {
      if (std::find(ctx.active_docs.begin(), ctx.active_docs.end(), id) == ctx.active_docs.end()) {
        ctx.active_docs.push_back(id);
      }
    }
  }
  return Payload{payload_text(input)};
}

Payload RelevanceRetrieverModule::run_posthoc(const Payload& input, RunContext& ctx) {
  if (ctx.corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "no retrieval corpus for this item");
  const Bm25 bm = index_corpus(ctx.corpus);
  Answer answer = parse_answer(payload_text(input));
  for (auto& st : answer.statements) {
    // Closed-book drafts may carry markers for documents that were never shown.
    const auto dangling = std::remove_if(st.citations.begin(), st.citations.end(),
                                         [&](const Citation& c) { return !ctx.store.contains(c.doc_id); });
    if (dangling != st.citations.end()) {
      ctx.warn("dropped citations to unknown documents in '" + st.text + "'");
      st.citations.erase(dangling, st.citations.end());
      st.raw = render_statement(st);
    }
    if (st.has_citation()) continue;
    const auto hits = top_positive(bm, st.text, 1, {});
    if (hits.empty()) continue;
    const int id = materialize(ctx, hits.front().first);
    if (ctx.entailment().entails(ctx.store.get(id).text, st.text)) {
      st.citations = {Citation::whole(id)};
      st.raw = render_statement(st);
    }
  }
  return Payload{render_answer(answer)};
}

std::string RelevanceRetrieverModule::describe() const {
  std::ostringstream os;
  os << "relevance_retriever k=" << config_.k << " exclude_present=" << config_.exclude_present
     << " replace_active=" << config_.replace_active << " query_question=" << config_.query_question
     << " posthoc=" << config_.posthoc;
  return os.str();
}

IndexRetrieverModule::IndexRetrieverModule(std::string role) : role_(std::move(role)) {}

Payload IndexRetrieverModule::run(const Payload& input, RunContext& ctx) {
  static const std::regex check(R"(^\s*check\s*:?\s*(?:document\s*)?\[?\s*(\d{1,9})\s*\]?.*$)",
                                std::regex::icase);
  static const std::regex output(R"(^\s*output\s*:\s*(.*)$)", std::regex::icase);
  static const std::regex end(R"(^\s*end\b.*$)", std::regex::icase);

  std::string line;
  {
    std::stringstream ss{payload_text(input)};
    std::string l;
    while (std::getline(ss, l)) {
      if (!text::trim(l).empty()) {
        line = l;
        break;
      }
    }
  }
  if (line.empty()) return Payload{std::string()};

  std::smatch m;
  if (std::regex_match(line, m, check)) {
    const int id = std::stoi(m[1].str());
    if (!ctx.store.contains(id)) {
      ctx.warn("check of unknown document [" + std::to_string(id) + "] skipped");
      return Payload{"skip " + std::to_string(id)};
    }
    retrieve_index(ctx.store, id);
    ctx.view_overrides[id] = DocView::full;
    if (std::find(ctx.active_docs.begin(), ctx.active_docs.end(), id) == ctx.active_docs.end()) {
      ctx.active_docs.push_back(id);
    }
    return Payload{"check " + std::to_string(id)};
  }
  if (std::regex_match(line, end)) return Payload{std::string()};
  std::string sentence = std::regex_match(line, m, output) ? m[1].str() : line;
  sentence = std::string(text::trim(sentence));
  if (!sentence.empty()) ctx.data["prefix"] = ctx.data["prefix"].empty() ? sentence : ctx.data["prefix"] + " " + sentence;
  return Payload{sentence};
}

InnerRetrieverModule::InnerRetrieverModule(int n, PromptTemplate prompt, GenParams params)
    : n_(n), prompt_(std::move(prompt)), params_(std::move(params)) {
  if (n_ < 1) throw Error(ErrorKind::InvalidParams, "n must be >= 1");
  params_.validate();
}

Payload InnerRetrieverModule::run(const Payload& input, RunContext& ctx) {
  auto bindings = base_bindings(ctx, input);
  for (int i = 0; i < n_; ++i) {
    ctx.prompt_log.push_back(render_prompt(prompt_, bindings, ctx.store, {}).text);
  }
  auto result = retrieve_inner(ctx.question, ctx.llm(), n_, ctx.store, prompt_, params_);
  if (result.doc_ids.empty()) ctx.warn("inner retrieval produced no passages");
  ctx.active_docs = result.doc_ids;
  return Payload{payload_text(input)};
}

std::string InnerRetrieverModule::describe() const {
  return "inner_retriever n=" + std::to_string(n_) + " " + describe_prompt(prompt_, params_);
}

BlueprintModule::BlueprintModule(PromptTemplate prompt, GenParams params)
    : prompt_(std::move(prompt)), params_(std::move(params)) {
  params_.validate();
}

Payload BlueprintModule::run(const Payload& input, RunContext& ctx) {
  auto bindings = base_bindings(ctx, input);
  bindings["plan"] = "";
  log_prompt(ctx, prompt_, bindings);
  const auto plan = plan_blueprint(ctx.question, ctx.store, ctx.active_docs, ctx.llm(), prompt_, params_);
  return Payload{join(plan.questions, " ")};
}

std::string BlueprintModule::describe() const { return "blueprint " + describe_prompt(prompt_, params_); }

AttributerModule::AttributerModule(PromptTemplate prompt, GenParams params)
    : prompt_(std::move(prompt)), params_(std::move(params)) {
  params_.validate();
}

Payload AttributerModule::run(const Payload& input, RunContext& ctx) {
  auto bindings = base_bindings(ctx, input);
  bindings["plan"] = "";
  log_prompt(ctx, prompt_, bindings);
  const auto plan = plan_attribute(ctx.question, ctx.store, ctx.active_docs, ctx.llm(), prompt_, params_);
  std::vector<std::string> clusters;
  for (const auto& c : plan.clusters) clusters.push_back(render_cluster(c, ctx.store));
  return Payload{clusters};
}

std::string AttributerModule::describe() const { return "attributer " + describe_prompt(prompt_, params_); }

ScorerModule::ScorerModule(double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidParams, "scorer threshold must be in (0, 1]");
  }
}

Payload ScorerModule::run(const Payload& input, RunContext& ctx) {
  const std::string draft = payload_text(input);
  const Answer answer = parse_answer(draft);
  std::vector<std::string> unsupported;
  std::size_t supported = 0;
  for (const auto& st : answer.statements) {
    if (citations_entail(ctx.entailment(), st.citations, ctx.store, st.text)) {
      ++supported;
    } else {
      unsupported.push_back(st.raw);
    }
  }
  const double score = answer.statements.empty()
                           ? 0.0
                           : static_cast<double>(supported) / static_cast<double>(answer.statements.size());
  std::ostringstream note;
  note << "Draft answer: " << draft << "\n";
  note << "Supported statements: " << supported << " of " << answer.statements.size() << ".";
  if (!unsupported.empty()) {
    note << "\nStatements not supported by their citations:";
    for (const auto& s : unsupported) note << "\n- " << s;
  }
  ctx.data["feedback"] = note.str();
  return Payload{Judged{draft, score + 1e-12 >= threshold_}};
}

std::string ScorerModule::describe() const {
  std::ostringstream os;
  os << "scorer threshold=" << threshold_;
  return os.str();
}

Payload RerankerModule::run(const Payload& input, RunContext& ctx) {
  std::vector<std::string> candidates;
  if (const auto* list = std::get_if<std::vector<std::string>>(&input)) {
    candidates = *list;
  } else {
    candidates.push_back(payload_text(input));
  }
  if (candidates.empty()) return Payload{std::string()};
  const auto fb = feedback_rerank(candidates, ctx.entailment(), ctx.store);
  return Payload{candidates[fb.choice_idx]};
}

Payload VerifierModule::run(const Payload& input, RunContext& ctx) {
  const std::string draft = payload_text(input);
  const Answer answer = parse_answer(draft);
  bool verdict = !answer.statements.empty();
  for (const auto& st : answer.statements) {
    if (!verdict) break;
    verdict = feedback_verify(st, ctx.store, ctx.entailment()).verdict;
  }
  return Payload{Judged{draft, verdict}};
}

ReviserModule::ReviserModule(PromptTemplate prompt, GenParams params)
    : prompt_(std::move(prompt)), params_(std::move(params)) {
  params_.validate();
}

Payload ReviserModule::run(const Payload& input, RunContext& ctx) {
  const std::string draft = payload_text(input);
  std::string feedback = ctx.data["feedback"];
  if (feedback.empty()) feedback = "Draft answer: " + draft;
  auto bindings = base_bindings(ctx, input);
  bindings["feedback"] = feedback;
  bindings["prefix"] = "";
  log_prompt(ctx, prompt_, bindings);
  const Answer revised = edit_revise(parse_answer(draft), feedback, ctx.llm(), ctx.store, ctx.active_docs,
                                     ctx.question, prompt_, params_, &ctx.warnings);
  return Payload{revised.full_text};
}

std::string ReviserModule::describe() const { return "reviser " + describe_prompt(prompt_, params_); }

Payload SimplifierModule::run(const Payload& input, RunContext& ctx) {
  const Answer answer = parse_answer(payload_text(input));
  return Payload{edit_simplify(answer, ctx.store, ctx.entailment()).full_text};
}

}  // namespace citekit
