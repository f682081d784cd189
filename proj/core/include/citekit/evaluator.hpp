#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citekit/dataset.hpp"
#include "citekit/document.hpp"
#include "citekit/judge.hpp"
#include "citekit/pipeline.hpp"

namespace citekit {

/// Whether a statement should carry a citation.
using NeedRule = std::function<bool(const Statement&, std::string_view question)>;

/// Declarative, not a meta remark ("I could not find ..."), and mentions at
/// least one content word the question does not.
bool needs_citation(const Statement& statement, std::string_view question);
/// "default" or "all".
NeedRule make_need_rule(std::string_view name);

/// Per statement: nullopt when no citation is needed, else whether its
/// citations jointly entail it.
std::vector<std::optional<bool>> recall_verdicts(const Answer& answer, const DocStore& store, Judge& judge,
                                                 std::string_view question, const NeedRule& need);
/// Recalled share of the verdicts that are set; 1.0 when none are.
double recall_from_verdicts(const std::vector<std::optional<bool>>& verdicts);

double citation_recall(const Answer& answer, const DocStore& store, Judge& judge,
                       std::string_view question = {}, const NeedRule& need = needs_citation);
/// nullopt when the answer has no citations.
std::optional<double> citation_precision(const Answer& answer, const DocStore& store, Judge& judge);
/// nullopt when no statement is supported by its citations.
std::optional<double> citation_granularity(const Answer& answer, const DocStore& store, Judge& judge);
/// Smallest entailing span set found by greedy growth then pruning.
std::vector<SpanRef> minimal_entailing_spans(const Statement& statement, const DocStore& store, Judge& judge);
/// nullopt for an empty answer.
std::optional<double> citation_appropriateness(const Answer& answer, std::string_view question,
                                               const NeedRule& need = needs_citation);
/// nullopt without qa pairs.
std::optional<double> str_em_recall(const Answer& answer, const std::vector<QaPair>& qa_pairs);
double rouge_l(std::string_view prediction, std::string_view reference);
double answer_length(const Answer& answer);

/// Table order: mauve em rec prec app gran rouge len.
const std::vector<std::string>& builtin_metrics();
/// "rec,prec,..." in the given order. Throws UnknownMetric.
std::vector<std::string> parse_metric_list(std::string_view list);
/// Reported as a percentage (everything except len).
bool is_percent_metric(std::string_view name);

using CustomMetric =
    std::function<std::optional<double>(const Answer&, const DatasetRecord&, const DocStore&)>;

struct EvalConfig {
  std::vector<std::string> metrics = builtin_metrics();
  std::string need_rule = "default";
};

class Evaluator {
public:
  /// The judge is forked for every evaluation. Throws UnknownMetric.
  explicit Evaluator(const Judge& judge, EvalConfig config = {});

  /// Adds (or replaces) a metric and selects it.
  void register_metric(std::string name, CustomMetric fn, bool percent = true);

  /// Failing metrics are left undefined and described in `errors`.
  MetricValues evaluate(const Answer& answer, const DatasetRecord& record, const DocStore& store,
                        std::vector<std::string>* errors = nullptr) const;
  std::vector<std::optional<bool>> statement_verdicts(const Answer& answer, const DatasetRecord& record,
                                                      const DocStore& store) const;
  ItemScorer scorer() const;

  const std::vector<std::string>& metrics() const noexcept { return config_.metrics; }
  bool percent(std::string_view name) const;
  const Judge& judge() const noexcept { return *judge_; }

private:
  std::shared_ptr<const Judge> judge_;
  EvalConfig config_;
  NeedRule need_;
  std::map<std::string, CustomMetric, std::less<>> custom_;
  std::map<std::string, bool, std::less<>> custom_percent_;
};

struct EvalReport {
  std::vector<std::string> metrics;
  struct Item {
    std::size_t index = 0;
    std::string question;
    bool ok = false;
    std::string error;
    MetricValues values;
  };
  std::vector<Item> items;
  std::map<std::string, double> aggregate;
  std::size_t scored = 0;
  std::size_t failed = 0;
};

EvalReport make_report(const std::vector<ItemResult>& results, std::vector<std::string> metrics);

/// Percent metrics are scaled by 100 here and nowhere else.
std::string report_json(const EvalReport& report, const Evaluator* evaluator = nullptr);
/// Aligned text table; undefined values print as "n/a".
std::string report_table(const EvalReport& report, const Evaluator* evaluator = nullptr);

struct TrainingRecord {
  std::string question;
  std::string prompt_digest;
  std::string answer;
  std::vector<std::optional<bool>> verdicts;
  MetricValues metrics;

  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

std::string to_json_line(const TrainingRecord& record);
TrainingRecord training_record_from_json(std::string_view line);

/// One line per successfully run item. Throws FileUnwritable.
std::size_t export_training_data(const std::vector<ItemResult>& results, const Dataset& dataset,
                                 const Evaluator& evaluator, const std::filesystem::path& path);
std::vector<TrainingRecord> read_training_data(const std::filesystem::path& path);

}  // namespace citekit
