#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citekit/document.hpp"
#include "citekit/enhancers.hpp"
#include "citekit/llm.hpp"
#include "citekit/pipeline.hpp"

namespace citekit {

/// One enhancer of a recipe with its numeric options ("k", "candidates", ...).
struct EnhancerConfig {
  std::string kind;
  std::map<std::string, double> options;

  double option(const std::string& name, double fallback) const;
  friend bool operator==(const EnhancerConfig&, const EnhancerConfig&) = default;
};

/// reranker, scorer, verifier, summary_retriever, relevance_retriever,
/// inner_retriever, index_retriever, attributer, blueprint, reviser, simplifier.
const std::vector<std::string>& enhancer_kinds();

/// Wirings a recipe can use. "sequence" chains whatever enhancers are listed:
/// retrievers and planners before the generator, the rest after it.
const std::vector<std::string>& recipe_topologies();

struct RecipeSpec {
  std::string name;
  std::string topology = "sequence";
  DocView doc_view = DocView::full;
  int doc_count = static_cast<int>(kDefaultTopDocs);
  GenerationMode generation_mode = GenerationMode::direct;
  std::vector<EnhancerConfig> enhancers;
  /// Prompt bodies by role: "answer", "attribute", "blueprint", "revise",
  /// "recite", "query". Missing roles use the built-in defaults.
  std::map<std::string, std::string> prompts;
  /// Applies to the answer generator; the other roles inherit the temperature.
  GenParams params;

  bool has_enhancer(std::string_view kind) const;
  const EnhancerConfig* enhancer(std::string_view kind) const;
  friend bool operator==(const RecipeSpec&, const RecipeSpec&) = default;
};

/// The thirteen registry names in listing order.
const std::vector<std::string>& recipe_names();
/// Throws UnknownRecipe.
RecipeSpec registry_recipe(std::string_view name);

/// One-line summary: "generator(iterative) + attributer".
std::string recipe_summary(const RecipeSpec& spec);

/// Throws SchemaViolation naming the offending field.
void validate_recipe(const RecipeSpec& spec);

struct RecipeOverrides {
  std::optional<int> doc_count;
  std::optional<DocView> doc_view;
  std::optional<GenParams> params;
  std::map<std::string, std::string> prompts;
};

/// Throws InvalidOverride.
RecipeSpec apply_overrides(RecipeSpec spec, const RecipeOverrides& overrides);

struct DatasetProfile {
  std::string init_docs_key = "docs";
  std::string corpus_key;
};

struct BuiltRecipe {
  RecipeSpec spec;
  PipelineGraph graph;
  /// top_n and document keys; workers are left at 1.
  RunOptions options;
};

/// Validated graph for a spec. Throws SchemaViolation, InvalidTemplate.
BuiltRecipe build_recipe(const RecipeSpec& spec, const DatasetProfile& profile = {});
/// Throws UnknownRecipe, InvalidOverride.
BuiltRecipe build_recipe(std::string_view name, const RecipeOverrides& overrides = {},
                         const DatasetProfile& profile = {});

/// JSON recipe. A "base" field starts from that registry recipe and the other
/// fields override it. Throws SchemaViolation, UnknownRecipe.
RecipeSpec parse_recipe(std::string_view json_text);
RecipeSpec load_recipe_file(const std::filesystem::path& path);
/// Complete JSON form; parse_recipe(emit_recipe(s)) == s.
std::string emit_recipe(const RecipeSpec& spec);

/// Registry name or path to a recipe file.
RecipeSpec resolve_recipe(std::string_view ref);

}  // namespace citekit
