#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "citekit/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"citekit: citation-generation pipelines and their evaluation"};
  app.require_subcommand(1);

  citekit::RunConfig run;
  std::string trace_out;
  std::string export_out;
  auto* run_cmd = app.add_subcommand("run", "Run a recipe over a dataset and score it");
  run_cmd->add_option("--recipe", run.recipe, "Recipe name or recipe file")->required();
  run_cmd->add_option("--dataset", run.dataset, "Dataset JSON")->required();
  run_cmd->add_option("--backend", run.backend, "scripted:<file> or http:<base-url>,<model>")->required();
  run_cmd->add_option("--judge", run.judge, "lexical[:t], substring, http:<url>")->capture_default_str();
  run_cmd->add_option("--metrics", run.metrics, "Comma list (default: all)");
  run_cmd->add_option("--need-rule", run.need_rule, "default or all")->capture_default_str();
  run_cmd->add_option("--fields", run.field_map, "Field renames, e.g. question=q,docs=ctxs");
  run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  run_cmd->add_option("--workers", run.workers, "Worker threads")->capture_default_str();
  run_cmd->add_option("--trace-out", trace_out, "Per-item trace file");
  run_cmd->add_option("--export", export_out, "Training-data export file");
  run_cmd->add_flag("--deterministic", run.deterministic, "Force temperature 0");

  citekit::EvalCommandConfig eval;
  std::string report_path;
  auto* eval_cmd = app.add_subcommand("eval", "Rescore an answers file");
  eval_cmd->add_option("--answers", eval.answers, "answers.jsonl from a run")->required();
  eval_cmd->add_option("--dataset", eval.dataset, "Dataset JSON")->required();
  eval_cmd->add_option("--judge", eval.judge, "Entailment judge")->capture_default_str();
  eval_cmd->add_option("--metrics", eval.metrics, "Comma list (default: all)");
  eval_cmd->add_option("--need-rule", eval.need_rule, "default or all")->capture_default_str();
  eval_cmd->add_option("--fields", eval.field_map, "Field renames");
  eval_cmd->add_option("--report", report_path, "Write report JSON here");

  bool verbose = false;
  auto* list_cmd = app.add_subcommand("list", "List registry recipes");
  list_cmd->add_flag("--verbose,-v", verbose, "Show view and document count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : citekit::kExitConfig;
  }

  if (*run_cmd) {
    if (!trace_out.empty()) run.trace_out = trace_out;
    if (!export_out.empty()) run.export_out = export_out;
    return citekit::cmd_run(run, std::cout, std::cerr);
  }
  if (*eval_cmd) {
    if (!report_path.empty()) eval.report = report_path;
    return citekit::cmd_eval(eval, std::cout, std::cerr);
  }
  return citekit::cmd_list(verbose, std::cout);
}
