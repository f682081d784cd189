#include "citekit/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citekit/error.hpp"
#include "citekit/text.hpp"

namespace citekit {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string_view>& meta_markers() {
  static const std::vector<std::string_view> markers = {
      "i could not find", "i couldn't find",   "i cannot find",          "i can't find",
      "i could not",      "i do not know",     "i don't know",           "no information",
      "sorry",            "does not mention",  "do not mention",         "not mentioned in the provided",
      "provided search results do not", "provided documents do not",
  };
  return markers;
}

std::size_t token_count(std::string_view s) { return text::whitespace_tokens(s).size(); }

std::size_t spans_tokens(const std::vector<SpanRef>& spans, const DocStore& store) {
  std::size_t n = 0;
  for (const auto& s : spans) {
    const Document* doc = store.find(s.doc_id);
    if (doc != nullptr) n += token_count(doc->span_text(s));
  }
  return n;
}

double round_fixed(double v) { return std::round(v * 1e4) / 1e4; }

json metric_json(const std::optional<double>& v, bool percent) {
  if (!v) return nullptr;
  return round_fixed(percent ? *v * 100.0 : *v);
}

std::string format_cell(const std::optional<double>& v, bool percent) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", percent ? *v * 100.0 : *v);
  return buf;
}

const std::map<std::string, std::string, std::less<>>& column_titles() {
  static const std::map<std::string, std::string, std::less<>> titles = {
      {"mauve", "MAUVE"}, {"em", "EM Rec."}, {"rec", "Rec."},     {"prec", "Prec."},
      {"app", "App."},    {"gran", "Gran."}, {"rouge", "ROUGE-L"}, {"len", "Length"},
  };
  return titles;
}

bool percent_for(const Evaluator* evaluator, const std::string& name) {
  return evaluator != nullptr ? evaluator->percent(name) : is_percent_metric(name);
}

}  // namespace

bool needs_citation(const Statement& statement, std::string_view question) {
  const std::string body(text::trim(statement.text));
  if (body.empty() || body.back() == '?') return false;
  const std::string lower = text::to_lower(body);
  for (auto marker : meta_markers()) {
    if (lower.find(marker) != std::string::npos) return false;
  }
  const auto q = text::content_tokens(question);
  const std::set<std::string> asked(q.begin(), q.end());
  for (const auto& t : text::content_tokens(body)) {
    if (!asked.count(t)) return true;
  }
  return false;
}

NeedRule make_need_rule(std::string_view name) {
  if (name == "default" || name == "heuristic") return needs_citation;
  if (name == "all") return [](const Statement&, std::string_view) { return true; };
  throw Error(ErrorKind::InvalidConfig, "unknown need rule '" + std::string(name) + "'");
}

std::vector<std::optional<bool>> recall_verdicts(const Answer& answer, const DocStore& store, Judge& judge,
                                                 std::string_view question, const NeedRule& need) {
  std::vector<std::optional<bool>> out;
  out.reserve(answer.statements.size());
  for (const auto& st : answer.statements) {
    if (!need(st, question)) {
      out.emplace_back(std::nullopt);
      continue;
    }
    out.emplace_back(st.has_citation() && citations_entail(judge, st.citations, store, st.text));
  }
  return out;
}

double recall_from_verdicts(const std::vector<std::optional<bool>>& verdicts) {
  std::size_t needing = 0;
  std::size_t recalled = 0;
  for (const auto& v : verdicts) {
    if (!v) continue;
    ++needing;
    if (*v) ++recalled;
  }
  return needing == 0 ? 1.0 : static_cast<double>(recalled) / static_cast<double>(needing);
}

double citation_recall(const Answer& answer, const DocStore& store, Judge& judge, std::string_view question,
                       const NeedRule& need) {
  return recall_from_verdicts(recall_verdicts(answer, store, judge, question, need));
}

std::optional<double> citation_precision(const Answer& answer, const DocStore& store, Judge& judge) {
  std::size_t total = 0;
  std::size_t irrelevant = 0;
  for (const auto& st : answer.statements) {
    if (st.citations.empty()) continue;
    total += st.citations.size();
    const bool joint = citations_entail(judge, st.citations, store, st.text);
    for (std::size_t i = 0; i < st.citations.size(); ++i) {
      if (citations_entail(judge, {st.citations[i]}, store, st.text)) continue;
      if (!joint) {
        ++irrelevant;
        continue;
      }
      std::vector<Citation> rest;
      for (std::size_t j = 0; j < st.citations.size(); ++j) {
        if (j != i) rest.push_back(st.citations[j]);
      }
      if (citations_entail(judge, rest, store, st.text)) ++irrelevant;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(total - irrelevant) / static_cast<double>(total);
}

std::vector<SpanRef> minimal_entailing_spans(const Statement& statement, const DocStore& store, Judge& judge) {
  std::vector<SpanRef> cited;
  for (const auto& c : statement.citations) {
    for (const auto& s : expand_citation(c, store)) {
      if (std::find(cited.begin(), cited.end(), s) == cited.end()) cited.push_back(s);
    }
  }
  const auto hyp = text::content_tokens(statement.text);
  std::vector<std::pair<std::size_t, std::size_t>> order;  // (overlap, position)
  for (std::size_t i = 0; i < cited.size(); ++i) {
    const Document* doc = store.find(cited[i].doc_id);
    const auto toks = doc ? text::content_tokens(doc->span_text(cited[i])) : std::vector<std::string>{};
    order.emplace_back(text::multiset_overlap(hyp, toks), i);
  }
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<SpanRef> chosen;
  bool found = false;
  for (const auto& [overlap, i] : order) {
    chosen.push_back(cited[i]);
    if (spans_entail(judge, chosen, store, statement.text)) {
      found = true;
      break;
    }
  }
  if (!found) return {};
  for (std::size_t k = chosen.size(); k-- > 0;) {
    if (chosen.size() == 1) break;
    std::vector<SpanRef> trial = chosen;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
    if (spans_entail(judge, trial, store, statement.text)) chosen = std::move(trial);
  }
  return chosen;
}

std::optional<double> citation_granularity(const Answer& answer, const DocStore& store, Judge& judge) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& st : answer.statements) {
    if (!st.has_citation() || !citations_entail(judge, st.citations, store, st.text)) continue;
    std::vector<SpanRef> cited;
    for (const auto& c : st.citations) {
      for (const auto& s : expand_citation(c, store)) {
        if (std::find(cited.begin(), cited.end(), s) == cited.end()) cited.push_back(s);
      }
    }
    const auto minimal = minimal_entailing_spans(st, store, judge);
    const std::size_t denom = spans_tokens(cited, store);
    ++n;
    if (denom == 0 || minimal.empty()) continue;
    sum += static_cast<double>(spans_tokens(minimal, store)) / static_cast<double>(denom);
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> citation_appropriateness(const Answer& answer, std::string_view question,
                                               const NeedRule& need) {
  if (answer.statements.empty()) return std::nullopt;
  std::size_t agree = 0;
  for (const auto& st : answer.statements) {
    if (st.has_citation() == need(st, question)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(answer.statements.size());
}

std::optional<double> str_em_recall(const Answer& answer, const std::vector<QaPair>& qa_pairs) {
  if (qa_pairs.empty()) return std::nullopt;
  const std::string haystack = text::normalize_for_match(strip_citations(answer.full_text));
  std::size_t hits = 0;
  for (const auto& qa : qa_pairs) {
    for (const auto& a : qa.short_answers) {
      const auto needle = text::normalize_for_match(a);
      if (!needle.empty() && haystack.find(needle) != std::string::npos) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(qa_pairs.size());
}

double rouge_l(std::string_view prediction, std::string_view reference) {
  const auto p = text::whitespace_tokens(text::to_lower(strip_citations(prediction)));
  const auto r = text::whitespace_tokens(text::to_lower(strip_citations(reference)));
  if (p.empty() || r.empty()) return 0.0;
  std::vector<std::size_t> prev(r.size() + 1, 0);
  std::vector<std::size_t> cur(r.size() + 1, 0);
  for (std::size_t i = 1; i <= p.size(); ++i) {
    for (std::size_t j = 1; j <= r.size(); ++j) {
      cur[j] = p[i - 1] == r[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[r.size()]);
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(p.size());
  const double recall = lcs / static_cast<double>(r.size());
  return 2.0 * precision * recall / (precision + recall);
}

double answer_length(const Answer& answer) {
  return static_cast<double>(token_count(strip_citations(answer.full_text)));
}

const std::vector<std::string>& builtin_metrics() {
  static const std::vector<std::string> names = {"mauve", "em", "rec", "prec", "app", "gran", "rouge", "len"};
  return names;
}

std::vector<std::string> parse_metric_list(std::string_view list) {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"rouge_l", "rouge"}, {"length", "len"}, {"str_em", "em"}, {"recall", "rec"},
      {"precision", "prec"}, {"granularity", "gran"}, {"appropriateness", "app"},
  };
  std::vector<std::string> out;
  std::stringstream ss{std::string(list)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string name = text::to_lower(text::trim(item));
    if (name.empty()) continue;
    if (auto it = aliases.find(name); it != aliases.end()) name = it->second;
    const auto& known = builtin_metrics();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw Error(ErrorKind::UnknownMetric, "unknown metric '" + name + "'");
    }
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  if (out.empty()) throw Error(ErrorKind::UnknownMetric, "empty metric list");
  return out;
}

bool is_percent_metric(std::string_view name) { return name != "len"; }

Evaluator::Evaluator(const Judge& judge, EvalConfig config)
    : judge_(judge.fork()), config_(std::move(config)), need_(make_need_rule(config_.need_rule)) {
  const auto& known = builtin_metrics();
  for (const auto& m : config_.metrics) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw Error(ErrorKind::UnknownMetric, "unknown metric '" + m + "'");
    }
  }
}

void Evaluator::register_metric(std::string name, CustomMetric fn, bool percent) {
  if (name.empty() || !fn) throw Error(ErrorKind::InvalidConfig, "custom metric needs a name and a function");
  custom_percent_[name] = percent;
  custom_[name] = std::move(fn);
  if (std::find(config_.metrics.begin(), config_.metrics.end(), name) == config_.metrics.end()) {
    config_.metrics.push_back(std::move(name));
  }
}

bool Evaluator::percent(std::string_view name) const {
  if (auto it = custom_percent_.find(name); it != custom_percent_.end()) return it->second;
  return is_percent_metric(name);
}

MetricValues Evaluator::evaluate(const Answer& answer, const DatasetRecord& record, const DocStore& store,
                                 std::vector<std::string>* errors) const {
  auto judge = judge_->fork();
  MetricValues out;
  for (const auto& name : config_.metrics) {
    try {
      if (auto it = custom_.find(name); it != custom_.end()) {
        out[name] = it->second(answer, record, store);
      } else if (name == "mauve") {
        out[name] = std::nullopt;
      } else if (name == "em") {
        out[name] = str_em_recall(answer, record.qa_pairs);
      } else if (name == "rec") {
        out[name] = citation_recall(answer, store, *judge, record.question, need_);
      } else if (name == "prec") {
        out[name] = citation_precision(answer, store, *judge);
      } else if (name == "app") {
        out[name] = citation_appropriateness(answer, record.question, need_);
      } else if (name == "gran") {
        out[name] = citation_granularity(answer, store, *judge);
      } else if (name == "rouge") {
        out[name] = record.gold_answer ? std::optional<double>(rouge_l(answer.full_text, *record.gold_answer))
                                       : std::nullopt;
      } else if (name == "len") {
        out[name] = answer_length(answer);
      }
    } catch (const std::exception& e) {
      out[name] = std::nullopt;
      if (errors != nullptr) errors->push_back("metric " + name + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::optional<bool>> Evaluator::statement_verdicts(const Answer& answer, const DatasetRecord& record,
                                                               const DocStore& store) const {
  auto judge = judge_->fork();
  return recall_verdicts(answer, store, *judge, record.question, need_);
}

ItemScorer Evaluator::scorer() const {
  return [this](const ItemResult& r, const DatasetRecord& record) {
    return evaluate(r.answer, record, r.store);
  };
}

EvalReport make_report(const std::vector<ItemResult>& results, std::vector<std::string> metrics) {
  EvalReport report;
  report.metrics = std::move(metrics);
  for (const auto& r : results) {
    EvalReport::Item item;
    item.index = r.index;
    item.question = r.question;
    item.ok = r.ok;
    item.error = r.error;
    if (r.ok) {
      for (const auto& m : report.metrics) {
        auto it = r.metrics.find(m);
        item.values[m] = it == r.metrics.end() ? std::nullopt : it->second;
      }
      ++report.scored;
    } else {
      ++report.failed;
    }
    report.items.push_back(std::move(item));
  }
  const auto agg = aggregate_metrics(results);
  for (const auto& m : report.metrics) {
    if (auto it = agg.find(m); it != agg.end()) report.aggregate[m] = it->second;
  }
  return report;
}

std::string report_json(const EvalReport& report, const Evaluator* evaluator) {
  json root;
  root["metrics"] = report.metrics;
  json items = json::array();
  json failures = json::array();
  for (const auto& item : report.items) {
    if (!item.ok) {
      failures.push_back({{"index", item.index}, {"question", item.question}, {"error", item.error}});
      continue;
    }
    json values = json::object();
    for (const auto& m : report.metrics) {
      auto it = item.values.find(m);
      values[m] = metric_json(it == item.values.end() ? std::nullopt : it->second, percent_for(evaluator, m));
    }
    items.push_back({{"index", item.index}, {"question", item.question}, {"metrics", values}});
  }
  json aggregate = json::object();
  for (const auto& m : report.metrics) {
    auto it = report.aggregate.find(m);
    aggregate[m] = metric_json(it == report.aggregate.end() ? std::nullopt : std::optional<double>(it->second),
                               percent_for(evaluator, m));
  }
  root["items"] = std::move(items);
  root["aggregate"] = std::move(aggregate);
  root["failures"] = std::move(failures);
  root["scored"] = report.scored;
  root["failed"] = report.failed;
  return root.dump(2) + "\n";
}

std::string report_table(const EvalReport& report, const Evaluator* evaluator) {
  std::vector<std::string> header{"items"};
  std::vector<std::string> row{std::to_string(report.scored) + "/" + std::to_string(report.items.size())};
  for (const auto& m : report.metrics) {
    auto t = column_titles().find(m);
    header.push_back(t == column_titles().end() ? m : t->second);
    auto it = report.aggregate.find(m);
    row.push_back(format_cell(it == report.aggregate.end() ? std::nullopt : std::optional<double>(it->second),
                              percent_for(evaluator, m)));
  }
  std::ostringstream os;
  for (const auto* line : {&header, &row}) {
    for (std::size_t i = 0; i < line->size(); ++i) {
      const std::size_t width = std::max(header[i].size(), row[i].size()) + 2;
      std::string cell = (*line)[i];
      os << std::string(width - cell.size(), ' ') << cell;
    }
    os << "\n";
  }
  return os.str();
}

std::string to_json_line(const TrainingRecord& record) {
  json verdicts = json::array();
  for (const auto& v : record.verdicts) verdicts.push_back(v ? json(*v) : json(nullptr));
  json metrics = json::object();
  for (const auto& [k, v] : record.metrics) metrics[k] = v ? json(round_fixed(*v)) : json(nullptr);
  json j = {{"question", record.question},
            {"prompt_digest", record.prompt_digest},
            {"answer", record.answer},
            {"verdicts", verdicts},
            {"metrics", metrics}};
  return j.dump();
}

TrainingRecord training_record_from_json(std::string_view line) {
  TrainingRecord r;
  try {
    const auto j = json::parse(line);
    r.question = j.at("question").get<std::string>();
    r.prompt_digest = j.at("prompt_digest").get<std::string>();
    r.answer = j.at("answer").get<std::string>();
    for (const auto& v : j.at("verdicts")) {
      r.verdicts.push_back(v.is_null() ? std::nullopt : std::optional<bool>(v.get<bool>()));
    }
    for (const auto& [k, v] : j.at("metrics").items()) {
      r.metrics[k] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("training record: ") + e.what());
  }
  return r;
}

std::size_t export_training_data(const std::vector<ItemResult>& results, const Dataset& dataset,
                                 const Evaluator& evaluator, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::FileUnwritable, "cannot write " + path.string());
  std::size_t written = 0;
  for (const auto& r : results) {
    if (!r.ok || r.index >= dataset.records.size()) continue;
    TrainingRecord rec;
    rec.question = r.question;
    std::string all;
    for (const auto& d : r.trace.prompt_digests) all += d;
    rec.prompt_digest = text::digest(all);
    rec.answer = r.answer.full_text;
    rec.verdicts = evaluator.statement_verdicts(r.answer, dataset.records[r.index], r.store);
    rec.metrics = r.metrics;
    out << to_json_line(rec) << "\n";
    ++written;
  }
  out.flush();
  if (!out) throw Error(ErrorKind::FileUnwritable, "cannot write " + path.string());
  return written;
}

std::vector<TrainingRecord> read_training_data(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileUnreadable, "cannot open " + path.string());
  std::vector<TrainingRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out.push_back(training_record_from_json(line));
  }
  return out;
}

}  // namespace citekit
