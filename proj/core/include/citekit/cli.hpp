#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citekit/pipeline.hpp"

namespace citekit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAllFailed = 3;

struct RunConfig {
  /// Registry name or recipe file.
  std::string recipe;
  std::filesystem::path dataset;
  /// "scripted:<file>" or "http:<base-url>,<model>".
  std::string backend;
  std::string judge = "lexical";
  /// Comma list; empty selects every built-in metric.
  std::string metrics;
  std::string need_rule = "default";
  /// "question=q,docs=ctxs" style field renames.
  std::string field_map;
  int workers = 1;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> trace_out;
  std::optional<std::filesystem::path> export_out;
  /// Forces temperature 0 on every generation.
  bool deterministic = false;
};

struct EvalCommandConfig {
  std::filesystem::path answers;
  std::filesystem::path dataset;
  std::string judge = "lexical";
  std::string metrics;
  std::string need_rule = "default";
  std::string field_map;
  /// Where report.json goes; nothing is written when unset.
  std::optional<std::filesystem::path> report;
};

/// Writes <out>/answers.jsonl and <out>/report.json, plus the optional trace
/// and export files, and prints the report table to `out`.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
/// Rescores an answers file against its dataset.
int cmd_eval(const EvalCommandConfig& config, std::ostream& out, std::ostream& err);
int cmd_list(bool verbose, std::ostream& out);

/// One answers.jsonl line: question, answer text, statements with their
/// citations, the document store and a trace reference.
std::string answer_line(const ItemResult& result);
/// Inverse of answer_line (metrics and trace steps are not stored). Throws SchemaViolation.
ItemResult parse_answer_line(std::string_view line);
std::vector<ItemResult> read_answers(const std::filesystem::path& path);

std::string trace_line(const ItemResult& result);

}  // namespace citekit
