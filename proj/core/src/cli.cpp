#include "citekit/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citekit/dataset.hpp"
#include "citekit/error.hpp"
#include "citekit/evaluator.hpp"
#include "citekit/judge.hpp"
#include "citekit/llm.hpp"
#include "citekit/recipes.hpp"
#include "citekit/text.hpp"

namespace citekit {

using json = nlohmann::ordered_json;

namespace {

json span_json(const SpanRef& s) { return json::array({s.doc_id, s.span_idx, s.range.begin, s.range.end}); }

SpanRef span_from(const json& j) {
  SpanRef s;
  s.doc_id = j.at(0).get<int>();
  s.span_idx = j.at(1).get<int>();
  s.range.begin = j.at(2).get<std::size_t>();
  s.range.end = j.at(3).get<std::size_t>();
  return s;
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::FileUnwritable, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::FileUnwritable, "cannot write " + path.string());
}

std::vector<std::string> metric_names(const std::string& list) {
  return list.empty() ? builtin_metrics() : parse_metric_list(list);
}

void rebuild_store(DocStore& store, const json& docs) {
  std::vector<std::pair<int, Document>> ordered;
  for (const auto& d : docs) {
    Document doc;
    doc.title = d.at("title").get<std::string>();
    doc.text = d.at("text").get<std::string>();
    doc.snippet = optional_from(d, "snippet");
    doc.summary = optional_from(d, "summary");
    doc.origin = d.value("origin", std::string("initial")) == "retrieved_runtime" ? DocOrigin::retrieved_runtime
                                                                                  : DocOrigin::initial;
    ordered.emplace_back(d.at("doc_id").get<int>(), std::move(doc));
  }
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [id, doc] : ordered) {
    while (store.next_id() < id) store.remove(store.add(make_document("gap", "gap.")));
    if (store.next_id() != id) throw Error(ErrorKind::SchemaViolation, "docs: duplicate doc_id");
    store.add(std::move(doc));
  }
}

struct Loaded {
  Dataset dataset;
  std::unique_ptr<Judge> judge;
  std::unique_ptr<Evaluator> evaluator;
};

Loaded load_common(const std::filesystem::path& dataset, const std::string& field_map, const std::string& judge,
                   const std::string& metrics, const std::string& need_rule) {
  Loaded l;
  l.dataset = load_dataset(dataset, parse_field_map(field_map));
  l.judge = make_judge(judge);
  EvalConfig cfg;
  cfg.metrics = metric_names(metrics);
  cfg.need_rule = need_rule;
  l.evaluator = std::make_unique<Evaluator>(*l.judge, cfg);
  return l;
}

int finish(const std::vector<ItemResult>& results, const Evaluator& evaluator, std::ostream& out,
           std::ostream& err) {
  const auto report = make_report(results, evaluator.metrics());
  out << report_table(report, &evaluator);
  for (const auto& r : results) {
    if (!r.ok) err << "item " << r.index << " failed: " << r.error << "\n";
  }
  if (report.scored == 0) {
    err << "no item was scored\n";
    return kExitAllFailed;
  }
  return kExitOk;
}

}  // namespace

std::string answer_line(const ItemResult& r) {
  json statements = json::array();
  for (const auto& st : r.answer.statements) {
    json cites = json::array();
    for (const auto& c : st.citations) {
      json spans = json::array();
      for (const auto& s : c.span_refs) spans.push_back(span_json(s));
      cites.push_back({{"doc_id", c.doc_id},
                       {"level", c.level == CitationLevel::span ? "span" : "document"},
                       {"spans", spans}});
    }
    statements.push_back({{"text", st.text}, {"raw", st.raw}, {"citations", cites}});
  }
  json docs = json::array();
  for (const auto& [id, d] : r.store) {
    docs.push_back({{"doc_id", id},
                    {"title", d.title},
                    {"text", d.text},
                    {"snippet", optional_string(d.snippet)},
                    {"summary", optional_string(d.summary)},
                    {"origin", std::string(to_string(d.origin))}});
  }
  json j = {{"index", r.index},
            {"question", r.question},
            {"ok", r.ok},
            {"answer", r.answer.full_text},
            {"statements", statements},
            {"docs", docs},
            {"warnings", r.warnings},
            {"trace_ref", text::digest(trace_line(r))}};
  if (!r.ok) {
    j["error"] = r.error;
    j["error_kind"] = r.error_kind ? json(std::string(to_string(*r.error_kind))) : json(nullptr);
    j["failed_node"] = r.failed_node;
  }
  return j.dump();
}

ItemResult parse_answer_line(std::string_view line) {
  ItemResult r;
  try {
    const auto j = json::parse(line);
    r.index = j.at("index").get<std::size_t>();
    r.question = j.at("question").get<std::string>();
    r.ok = j.at("ok").get<bool>();
    r.answer.full_text = j.at("answer").get<std::string>();
    for (const auto& s : j.at("statements")) {
      Statement st;
      st.text = s.at("text").get<std::string>();
      st.raw = s.at("raw").get<std::string>();
      for (const auto& c : s.at("citations")) {
        Citation cite;
        cite.doc_id = c.at("doc_id").get<int>();
        cite.level = c.at("level").get<std::string>() == "span" ? CitationLevel::span : CitationLevel::document;
        for (const auto& sp : c.at("spans")) cite.span_refs.push_back(span_from(sp));
        st.citations.push_back(std::move(cite));
      }
      r.answer.statements.push_back(std::move(st));
    }
    rebuild_store(r.store, j.at("docs"));
    if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    if (j.contains("failed_node")) r.failed_node = j["failed_node"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, std::string("answers line: ") + e.what());
  }
  return r;
}

std::vector<ItemResult> read_answers(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileUnreadable, "cannot open " + path.string());
  std::vector<ItemResult> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out.push_back(parse_answer_line(line));
  }
  return out;
}

std::string trace_line(const ItemResult& r) {
  json steps = json::array();
  for (const auto& s : r.trace.steps) {
    steps.push_back({{"node", s.node_id}, {"turn", s.turn}, {"input", s.input_digest}, {"output", s.output_digest}});
  }
  json j = {{"index", r.index},
            {"ok", r.ok},
            {"steps", steps},
            {"final_answer", r.trace.final_answer},
            {"runtime_doc_ids", r.trace.runtime_doc_ids},
            {"prompt_digests", r.trace.prompt_digests}};
  if (!r.ok) j["error"] = r.error;
  return j.dump();
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<ItemResult> results;
  Loaded common;
  try {
    if (config.workers < 1) throw Error(ErrorKind::InvalidConfig, "--workers must be >= 1");
    if (config.out_dir.empty()) throw Error(ErrorKind::InvalidConfig, "--out is required");
    RecipeSpec spec = resolve_recipe(config.recipe);
    if (config.deterministic) spec.params.temperature = 0.0;
    BuiltRecipe built = build_recipe(spec);
    common = load_common(config.dataset, config.field_map, config.judge, config.metrics, config.need_rule);
    auto backend = make_backend(config.backend);

    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (!std::filesystem::is_directory(config.out_dir)) {
      throw Error(ErrorKind::FileUnwritable, "cannot create " + config.out_dir.string());
    }
    for (const auto& w : built.graph.lint()) err << "warning: " << w << "\n";

    built.options.workers = config.workers;
    results = run_on_dataset(built.graph, common.dataset, *backend, *common.judge, common.evaluator->scorer(),
                             built.options);

    std::string answers;
    std::string traces;
    for (const auto& r : results) {
      answers += answer_line(r) + "\n";
      traces += trace_line(r) + "\n";
    }
    write_file(config.out_dir / "answers.jsonl", answers);
    write_file(config.out_dir / "report.json",
               report_json(make_report(results, common.evaluator->metrics()), common.evaluator.get()));
    if (config.trace_out) write_file(*config.trace_out, traces);
    if (config.export_out) export_training_data(results, common.dataset, *common.evaluator, *config.export_out);
  } catch (const std::exception& e) {
    err << "citekit run: " << e.what() << "\n";
    return kExitConfig;
  }
  return finish(results, *common.evaluator, out, err);
}

int cmd_eval(const EvalCommandConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<ItemResult> results;
  Loaded common;
  try {
    common = load_common(config.dataset, config.field_map, config.judge, config.metrics, config.need_rule);
    results = read_answers(config.answers);
    if (results.size() != common.dataset.size()) {
      throw Error(ErrorKind::AlignmentError, std::to_string(results.size()) + " answers for " +
                                                 std::to_string(common.dataset.size()) + " records");
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
      auto& r = results[i];
      const auto& record = common.dataset.records[i];
      if (r.index != i || r.question != record.question) {
        throw Error(ErrorKind::AlignmentError, "answer " + std::to_string(i) + " does not match record " +
                                                   std::to_string(i));
      }
      if (r.ok) r.metrics = common.evaluator->evaluate(r.answer, record, r.store);
    }
    if (config.report) {
      write_file(*config.report,
                 report_json(make_report(results, common.evaluator->metrics()), common.evaluator.get()));
    }
  } catch (const std::exception& e) {
    err << "citekit eval: " << e.what() << "\n";
    return kExitConfig;
  }
  return finish(results, *common.evaluator, out, err);
}

int cmd_list(bool verbose, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& n : recipe_names()) width = std::max(width, n.size());
  for (const auto& name : recipe_names()) {
    const auto spec = registry_recipe(name);
    out << std::left << std::setw(static_cast<int>(width + 2)) << name << recipe_summary(spec);
    if (verbose) {
      out << "  [topology=" << spec.topology << " doc_view=" << to_string(spec.doc_view)
          << " doc_count=" << spec.doc_count << "]";
    }
    out << "\n";
  }
  return kExitOk;
}

}  // namespace citekit
