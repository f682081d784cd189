#include <gtest/gtest.h>

#include <set>

#include "citekit/error.hpp"
#include "citekit/recipes.hpp"
#include "test_support.hpp"

using namespace citekit;

namespace {

ErrorKind kind_of(const std::function<void()>& fn, std::string* detail = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (detail != nullptr) *detail = e.detail();
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST(Registry, ThirteenNamesAllBuild) {
  const auto& names = recipe_names();
  ASSERT_EQ(names.size(), 13u);
  EXPECT_EQ(names.front(), "alce_vanilla");
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  for (const auto& n : names) {
    const auto built = build_recipe(n);
    EXPECT_EQ(built.spec.name, n);
    EXPECT_TRUE(built.graph.has_node(built.graph.entry())) << n;
    EXPECT_EQ(built.options.top_n, static_cast<std::size_t>(built.spec.doc_count)) << n;
  }
  EXPECT_EQ(kind_of([] { registry_recipe("nope"); }), ErrorKind::UnknownRecipe);
}

TEST(Registry, DocViewsAndCounts) {
  EXPECT_EQ(registry_recipe("alce_summ").doc_view, DocView::summary);
  EXPECT_EQ(registry_recipe("alce_snippet").doc_view, DocView::snippet);
  EXPECT_EQ(registry_recipe("alce_vanilla").doc_count, 5);
  EXPECT_EQ(registry_recipe("recitation").doc_count, 0);
  EXPECT_EQ(registry_recipe("self_rag").generation_mode, GenerationMode::iterative);
  EXPECT_EQ(recipe_summary(registry_recipe("attribute_then_generate")), "generator(iterative) + attributer");
}

TEST(Validate, EnhancerErrorsNameThePath) {
  std::string detail;
  auto spec = registry_recipe("alce_rerank");
  spec.enhancers[0].options["candidates"] = 0;
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);
  EXPECT_NE(detail.find("enhancers[0].candidates"), std::string::npos);

  spec = registry_recipe("alce_rerank");
  spec.enhancers[0].options["candidates"] = 2.5;
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);

  spec = registry_recipe("alce_vanilla");
  spec.enhancers.push_back({"teleporter", {}});
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);
  EXPECT_NE(detail.find("enhancers[0].kind"), std::string::npos);

  spec = registry_recipe("vtg");
  spec.enhancers.pop_back();
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);
  EXPECT_NE(detail.find("enhancers"), std::string::npos);
}

TEST(Validate, ModesAndPrompts) {
  std::string detail;
  auto spec = registry_recipe("self_rag");
  spec.generation_mode = GenerationMode::direct;
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);
  EXPECT_NE(detail.find("generation_mode"), std::string::npos);

  spec = registry_recipe("alce_vanilla");
  spec.prompts["revise"] = "{question}";
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);
  EXPECT_NE(detail.find("prompts.revise"), std::string::npos);

  spec = registry_recipe("alce_vanilla");
  spec.prompts["answer"] = "{question} {unknown_slot}";
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);
  EXPECT_NE(detail.find("prompts.answer"), std::string::npos);

  spec = registry_recipe("attribute_then_generate");
  spec.prompts["answer"] = "{question}";
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);

  spec = registry_recipe("alce_vanilla");
  spec.params.temperature = -1;
  EXPECT_EQ(kind_of([&] { validate_recipe(spec); }, &detail), ErrorKind::SchemaViolation);
  EXPECT_NE(detail.find("params"), std::string::npos);
}

TEST(Overrides, ApplyAndReject) {
  RecipeOverrides o;
  o.doc_count = 3;
  o.doc_view = DocView::snippet;
  o.prompts["answer"] = "Q: {question}\n{docs}\nA:";
  const auto built = build_recipe("alce_vanilla", o);
  EXPECT_EQ(built.spec.doc_count, 3);
  EXPECT_EQ(built.spec.doc_view, DocView::snippet);
  EXPECT_EQ(built.options.top_n, 3u);

  RecipeOverrides bad;
  bad.doc_count = -1;
  EXPECT_EQ(kind_of([&] { build_recipe("alce_vanilla", bad); }), ErrorKind::InvalidOverride);
  RecipeOverrides role;
  role.prompts["blueprint"] = "{question}";
  EXPECT_EQ(kind_of([&] { build_recipe("alce_vanilla", role); }), ErrorKind::InvalidOverride);
}

TEST(Profile, KeysReachRunOptions) {
  DatasetProfile p;
  p.init_docs_key = "ctxs";
  p.corpus_key = "corpus";
  const auto built = build_recipe(registry_recipe("citation_enhanced"), p);
  EXPECT_EQ(built.options.init_docs_key, "ctxs");
  EXPECT_EQ(built.options.corpus_key, "corpus");
}

TEST(RecipeJson, EmitParseRoundTripForEveryRecipe) {
  for (const auto& n : recipe_names()) {
    auto spec = registry_recipe(n);
    EXPECT_EQ(parse_recipe(emit_recipe(spec)), spec) << n;
  }
  auto custom = registry_recipe("aar");
  custom.prompts["revise"] = "Fix: {question}\n{feedback}";
  custom.params.temperature = 0.3;
  custom.params.stop = {"\n\n"};
  EXPECT_EQ(parse_recipe(emit_recipe(custom)), custom);
}

TEST(RecipeJson, BaseWithOverrides) {
  const auto spec = parse_recipe(R"({"base": "alce_summ", "name": "summ3", "doc_count": 3,
                                     "params": {"temperature": 0.0, "max_new_tokens": 64}})");
  EXPECT_EQ(spec.name, "summ3");
  EXPECT_EQ(spec.doc_view, DocView::summary);
  EXPECT_EQ(spec.doc_count, 3);
  EXPECT_EQ(spec.params.max_new_tokens, 64);
}

TEST(RecipeJson, SchemaViolationPaths) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"[1]", "$"},
      {"{not json", "$"},
      {R"({"topology": "generate"})", "name"},
      {R"({"base": "alce_vanilla", "colour": 1})", "colour"},
      {R"({"base": "nope"})", "base"},
      {R"({"base": "alce_vanilla", "doc_count": "five"})", "doc_count"},
      {R"({"base": "alce_vanilla", "doc_view": "tiny"})", "doc_view"},
      {R"({"base": "alce_vanilla", "generation_mode": "sideways"})", "generation_mode"},
      {R"({"base": "alce_rerank", "enhancers": [{"candidates": 2}]})", "enhancers[0].kind"},
      {R"({"base": "alce_rerank", "enhancers": [{"kind": "reranker", "candidates": "x"}]})",
       "enhancers[0].candidates"},
      {R"({"base": "alce_vanilla", "params": {"max_new_tokens": 1.5}})", "params.max_new_tokens"},
      {R"({"base": "alce_vanilla", "params": {"top_p": 1}})", "params.top_p"},
      {R"({"base": "alce_vanilla", "prompts": {"answer": 3}})", "prompts.answer"},
  };
  for (const auto& [text, path] : cases) {
    std::string detail;
    EXPECT_EQ(kind_of([&] { parse_recipe(text); }, &detail), ErrorKind::SchemaViolation) << text;
    EXPECT_EQ(detail.rfind(path + ":", 0), 0u) << text << " -> " << detail;
  }
}

TEST(RecipeFiles, LoadAndResolve) {
  support::TempDir dir("recipes");
  support::write_file(dir / "mine.json", R"({"base": "blueprint", "name": "mine"})");
  support::write_file(dir / "broken.json", R"({"base": "blueprint", "doc_count": -2})");
  EXPECT_EQ(load_recipe_file(dir / "mine.json").name, "mine");
  EXPECT_EQ(resolve_recipe((dir / "mine.json").string()).topology, "blueprint");
  EXPECT_EQ(resolve_recipe("vtg").name, "vtg");
  std::string detail;
  EXPECT_EQ(kind_of([&] { load_recipe_file(dir / "broken.json"); }, &detail), ErrorKind::SchemaViolation);
  EXPECT_NE(detail.find("broken.json"), std::string::npos);
  EXPECT_EQ(kind_of([&] { load_recipe_file(dir / "missing.json"); }), ErrorKind::FileUnreadable);
  EXPECT_EQ(kind_of([&] { resolve_recipe("definitely_not_here"); }), ErrorKind::UnknownRecipe);
}

TEST(RecipeFiles, ShippedSamplesLoad) {
  const std::filesystem::path dir = std::filesystem::path(CITEKIT_FIXTURES_DIR).parent_path().parent_path() / "recipes";
  if (!std::filesystem::is_directory(dir)) GTEST_SKIP() << "no recipes directory";
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(build_recipe(load_recipe_file(entry.path()))) << entry.path();
  }
}
