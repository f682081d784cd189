#include "citekit/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citekit/error.hpp"
#include "citekit/prompts.hpp"

namespace citekit {

using json = nlohmann::json;

namespace {

struct OptionRule {
  std::string name;
  double min;
  double max;
  bool integral;
};

const std::map<std::string, std::vector<OptionRule>>& option_rules() {
  static const std::map<std::string, std::vector<OptionRule>> rules = {
      {"reranker", {{"candidates", 1, 64, true}, {"max_turns", 1, 64, true}}},
      {"scorer", {{"threshold", 1e-9, 1.0, false}, {"max_revisions", 0, 16, true}}},
      {"verifier", {{"max_retries", 0, 16, true}}},
      {"summary_retriever", {{"max_turns", 1, 64, true}}},
      {"index_retriever", {{"max_turns", 1, 64, true}}},
      {"relevance_retriever", {{"k", 1, 100, true}}},
      {"inner_retriever", {{"n", 1, 16, true}}},
      {"attributer", {}},
      {"blueprint", {}},
      {"reviser", {}},
      {"simplifier", {}},
  };
  return rules;
}

struct TopologyRule {
  std::set<std::string> kinds;
  std::optional<GenerationMode> mode;  // nullopt: free
};

const std::map<std::string, TopologyRule>& topology_rules() {
  using M = GenerationMode;
  static const std::map<std::string, TopologyRule> rules = {
      {"generate", {{}, M::direct}},
      {"rerank", {{"reranker"}, M::direct}},
      {"interact", {{"summary_retriever"}, M::iterative}},
      {"attribute_then_generate", {{"attributer"}, M::iterative}},
      {"blueprint", {{"blueprint"}, M::direct}},
      {"aar", {{"scorer", "reviser"}, M::direct}},
      {"citation_enhanced", {{"relevance_retriever"}, M::direct}},
      {"vtg", {{"verifier", "relevance_retriever", "simplifier"}, M::direct}},
      {"recitation", {{"inner_retriever"}, M::direct}},
      {"self_rag", {{"relevance_retriever", "reranker"}, M::iterative}},
      {"sequence", {{}, std::nullopt}},
  };
  return rules;
}

const std::vector<std::string>& prompt_roles() {
  static const std::vector<std::string> roles = {"answer", "attribute", "blueprint", "revise", "recite", "query"};
  return roles;
}

[[noreturn]] void schema(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::SchemaViolation, path + ": " + msg);
}

bool role_used(const RecipeSpec& spec, const std::string& role) {
  if (role == "answer") return true;
  if (role == "attribute") return spec.has_enhancer("attributer");
  if (role == "blueprint") return spec.has_enhancer("blueprint");
  if (role == "revise") return spec.has_enhancer("reviser");
  if (role == "recite") return spec.has_enhancer("inner_retriever");
  if (role == "query") return spec.topology == "self_rag";
  return false;
}

std::string default_prompt(const RecipeSpec& spec, const std::string& role) {
  if (role == "attribute") return std::string(prompts::kAttribute);
  if (role == "blueprint") return std::string(prompts::kBlueprintQuestions);
  if (role == "revise") return std::string(prompts::kRevise);
  if (role == "recite") return std::string(prompts::kRecite);
  if (role == "query") return std::string(prompts::kSelfRagQuery);
  const std::string& t = spec.topology;
  if (t == "interact") return std::string(prompts::kInteract);
  if (t == "attribute_then_generate") return std::string(prompts::kAttributedSentence);
  if (t == "blueprint") return std::string(prompts::kBlueprintAnswer);
  if (t == "citation_enhanced") return std::string(prompts::kClosedBook);
  if (t == "self_rag") {
    return std::string(spec.doc_view == DocView::snippet ? prompts::kSelfRagSnippetAnswer : prompts::kSelfRagAnswer);
  }
  if (t == "sequence" && spec.generation_mode == GenerationMode::iterative) {
    return std::string(spec.has_enhancer("attributer") ? prompts::kAttributedSentence : prompts::kSelfRagAnswer);
  }
  return std::string(prompts::kAlceAnswer);
}

std::string prompt_body(const RecipeSpec& spec, const std::string& role) {
  auto it = spec.prompts.find(role);
  return it != spec.prompts.end() ? it->second : default_prompt(spec, role);
}

PromptTemplate make_prompt(const RecipeSpec& spec, const std::string& role) {
  const DocView view = role == "answer" ? spec.doc_view : DocView::full;
  return PromptTemplate(prompt_body(spec, role), view);
}

GenParams role_params(const RecipeSpec& spec, const std::string& role) {
  GenParams p = spec.params;
  if (role == "attribute" || role == "blueprint" || role == "recite") p.stop.clear();
  if (role == "query") p.stop = {"\n"};
  return p;
}

int int_option(const RecipeSpec& spec, std::string_view kind, const std::string& name, int fallback) {
  const auto* e = spec.enhancer(kind);
  return e == nullptr ? fallback : static_cast<int>(e->option(name, fallback));
}

ModuleNode node(std::string id, std::shared_ptr<Module> module, Dispatch dispatch = Dispatch::single,
                std::string output_key = {}) {
  ModuleNode n;
  n.node_id = std::move(id);
  n.module = std::move(module);
  n.dispatch = dispatch;
  n.output_key = std::move(output_key);
  return n;
}

std::shared_ptr<Module> make_generator(const RecipeSpec& spec, int candidates) {
  GeneratorConfig cfg;
  cfg.prompt = make_prompt(spec, "answer");
  cfg.params = spec.params;
  cfg.candidates = candidates;
  cfg.mode = spec.generation_mode;
  return std::make_shared<GeneratorModule>(std::move(cfg));
}

std::shared_ptr<Module> make_enhancer(const RecipeSpec& spec, const EnhancerConfig& e, bool before_generator) {
  const std::string& k = e.kind;
  if (k == "reranker") return std::make_shared<RerankerModule>();
  if (k == "scorer") return std::make_shared<ScorerModule>(e.option("threshold", 1.0));
  if (k == "verifier") return std::make_shared<VerifierModule>();
  if (k == "simplifier") return std::make_shared<SimplifierModule>();
  if (k == "summary_retriever" || k == "index_retriever") return std::make_shared<IndexRetrieverModule>(k);
  if (k == "reviser") {
    return std::make_shared<ReviserModule>(make_prompt(spec, "revise"), role_params(spec, "revise"));
  }
  if (k == "attributer") {
    return std::make_shared<AttributerModule>(make_prompt(spec, "attribute"), role_params(spec, "attribute"));
  }
  if (k == "blueprint") {
    return std::make_shared<BlueprintModule>(make_prompt(spec, "blueprint"), role_params(spec, "blueprint"));
  }
  if (k == "inner_retriever") {
    return std::make_shared<InnerRetrieverModule>(static_cast<int>(e.option("n", 2)), make_prompt(spec, "recite"),
                                                  role_params(spec, "recite"));
  }
  RelevanceConfig cfg;
  cfg.k = static_cast<int>(e.option("k", 1));
  cfg.query_question = before_generator;
  cfg.posthoc = !before_generator;
  return std::make_shared<RelevanceRetrieverModule>(cfg);
}

bool runs_before_generator(const std::string& kind) {
  return kind == "inner_retriever" || kind == "relevance_retriever" || kind == "blueprint" || kind == "attributer";
}

PipelineGraph wire(const RecipeSpec& spec) {
  const std::string& t = spec.topology;
  const Condition always = Condition::always();
  const std::string out(kOutputNode);
  PipelineGraph g;

  if (t == "generate") {
    g = build_sequence({node("generator", make_generator(spec, 1))});
  } else if (t == "rerank") {
    const int n = int_option(spec, "reranker", "candidates", 4);
    g = build_sequence({node("generator", make_generator(spec, n)),
                        node("reranker", std::make_shared<RerankerModule>())});
  } else if (t == "interact") {
    const int turns = int_option(spec, "summary_retriever", "max_turns", 10);
    g.add_node(node("generator", make_generator(spec, 1)));
    g.add_node(node("summary_retriever", std::make_shared<IndexRetrieverModule>("summary_retriever")));
    g.set_target("generator", always, "summary_retriever");
    g.set_target("summary_retriever", Condition::text_empty(), out);
    g.set_target("summary_retriever", Condition::turn_lt(turns), "generator");
    g.set_target("summary_retriever", always, out);
    g.answer_key = "prefix";
  } else if (t == "attribute_then_generate") {
    g = build_sequence({node("attributer", make_enhancer(spec, *spec.enhancer("attributer"), true)),
                        node("generator", make_generator(spec, 1), Dispatch::iterative, "prefix")});
    g.answer_key = "prefix";
  } else if (t == "blueprint") {
    g = build_sequence({node("blueprint", make_enhancer(spec, *spec.enhancer("blueprint"), true)),
                        node("generator", make_generator(spec, 1))});
  } else if (t == "aar") {
    const int revisions = int_option(spec, "scorer", "max_revisions", 1);
    g.add_node(node("generator", make_generator(spec, 1)));
    g.add_node(node("scorer", make_enhancer(spec, *spec.enhancer("scorer"), false)));
    g.add_node(node("reviser", make_enhancer(spec, *spec.enhancer("reviser"), false)));
    g.set_target("generator", always, "scorer");
    g.set_target("scorer", Condition::verdict_true(), out);
    g.set_target("scorer", Condition::turn_lt(revisions + 1), "reviser");
    g.set_target("scorer", always, out);
    g.set_target("reviser", always, "scorer");
  } else if (t == "citation_enhanced") {
    g = build_sequence({node("generator", make_generator(spec, 1)),
                        node("retriever", make_enhancer(spec, *spec.enhancer("relevance_retriever"), false))});
  } else if (t == "vtg") {
    const int retries = int_option(spec, "verifier", "max_retries", 2);
    RelevanceConfig rc;
    rc.k = int_option(spec, "relevance_retriever", "k", 1);
    rc.exclude_present = true;
    rc.query_question = true;
    g.add_node(node("generator", make_generator(spec, 1)));
    g.add_node(node("verifier", std::make_shared<VerifierModule>()));
    g.add_node(node("retriever", std::make_shared<RelevanceRetrieverModule>(rc)));
    g.add_node(node("simplifier", std::make_shared<SimplifierModule>()));
    g.set_target("generator", Condition::turn_lt(retries + 1), "verifier");
    g.set_target("generator", always, "simplifier");
    g.set_target("verifier", Condition::verdict_false(), "retriever");
    g.set_target("verifier", always, "simplifier");
    g.set_target("retriever", always, "generator");
    g.set_target("simplifier", always, out);
  } else if (t == "recitation") {
    g = build_sequence({node("inner_retriever", make_enhancer(spec, *spec.enhancer("inner_retriever"), true)),
                        node("generator", make_generator(spec, 1))});
  } else if (t == "self_rag") {
    const int candidates = int_option(spec, "reranker", "candidates", 3);
    const int turns = int_option(spec, "reranker", "max_turns", 4);
    GeneratorConfig qc;
    qc.prompt = make_prompt(spec, "query");
    qc.params = role_params(spec, "query");
    RelevanceConfig rc;
    rc.k = int_option(spec, "relevance_retriever", "k", 1);
    rc.exclude_present = false;
    rc.replace_active = true;
    g.add_node(node("query", std::make_shared<GeneratorModule>(std::move(qc))));
    g.add_node(node("retriever", std::make_shared<RelevanceRetrieverModule>(rc)));
    g.add_node(node("generator", make_generator(spec, candidates)));
    g.add_node(node("reranker", std::make_shared<RerankerModule>(), Dispatch::single, "prefix"));
    g.set_target("query", always, "retriever");
    g.set_target("retriever", always, "generator");
    g.set_target("generator", always, "reranker");
    g.set_target("reranker", Condition::text_empty(), out);
    g.set_target("reranker", Condition::turn_lt(turns), "query");
    g.set_target("reranker", always, out);
    g.answer_key = "prefix";
  } else {
    std::vector<ModuleNode> chain;
    for (const auto& e : spec.enhancers) {
      if (runs_before_generator(e.kind)) chain.push_back(node(e.kind, make_enhancer(spec, e, true)));
    }
    const bool attributed = spec.has_enhancer("attributer");
    const int candidates = int_option(spec, "reranker", "candidates", 1);
    chain.push_back(node("generator", make_generator(spec, candidates),
                         attributed ? Dispatch::iterative : Dispatch::single, attributed ? "prefix" : ""));
    for (const auto& e : spec.enhancers) {
      if (!runs_before_generator(e.kind)) chain.push_back(node(e.kind, make_enhancer(spec, e, false)));
    }
    g = build_sequence(std::move(chain));
    if (attributed) g.answer_key = "prefix";
  }

  g.answer_view = t == "interact" ? DocView::full : spec.doc_view;
  return g;
}

struct RegistryEntry {
  const char* name;
  const char* topology;
  DocView view;
  int doc_count;
  GenerationMode mode;
  std::vector<EnhancerConfig> enhancers;
};

const std::vector<RegistryEntry>& registry() {
  using M = GenerationMode;
  using V = DocView;
  static const std::vector<RegistryEntry> entries = {
      {"alce_vanilla", "generate", V::full, 5, M::direct, {}},
      {"alce_rerank", "rerank", V::full, 5, M::direct, {{"reranker", {{"candidates", 4}}}}},
      {"alce_summ", "generate", V::summary, 10, M::direct, {}},
      {"alce_snippet", "generate", V::snippet, 10, M::direct, {}},
      {"alce_interact", "interact", V::summary, 10, M::iterative, {{"summary_retriever", {{"max_turns", 10}}}}},
      {"attribute_then_generate", "attribute_then_generate", V::full, 5, M::iterative, {{"attributer", {}}}},
      {"blueprint", "blueprint", V::full, 5, M::direct, {{"blueprint", {}}}},
      {"aar", "aar", V::full, 5, M::direct,
       {{"scorer", {{"threshold", 1.0}, {"max_revisions", 1}}}, {"reviser", {}}}},
      {"citation_enhanced", "citation_enhanced", V::full, 0, M::direct, {{"relevance_retriever", {{"k", 1}}}}},
      {"vtg", "vtg", V::full, 5, M::direct,
       {{"verifier", {{"max_retries", 2}}}, {"relevance_retriever", {{"k", 1}}}, {"simplifier", {}}}},
      {"recitation", "recitation", V::full, 0, M::direct, {{"inner_retriever", {{"n", 2}}}}},
      {"self_rag", "self_rag", V::full, 0, M::iterative,
       {{"relevance_retriever", {{"k", 1}}}, {"reranker", {{"candidates", 3}, {"max_turns", 4}}}}},
      {"self_rag_snippet", "self_rag", V::snippet, 0, M::iterative,
       {{"relevance_retriever", {{"k", 1}}}, {"reranker", {{"candidates", 3}, {"max_turns", 4}}}}},
  };
  return entries;
}

json params_json(const GenParams& p) {
  return {{"max_new_tokens", p.max_new_tokens}, {"temperature", p.temperature}, {"stop", p.stop}};
}

json number_json(double v) {
  if (std::floor(v) == v && std::fabs(v) < 1e15) return static_cast<long long>(v);
  return v;
}

template <class T>
T get_field(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    schema(path, "wrong type");
  }
}

}  // namespace

double EnhancerConfig::option(const std::string& name, double fallback) const {
  auto it = options.find(name);
  return it == options.end() ? fallback : it->second;
}

const std::vector<std::string>& enhancer_kinds() {
  static const std::vector<std::string> kinds = {
      "reranker",         "scorer",     "verifier",  "summary_retriever", "relevance_retriever", "inner_retriever",
      "index_retriever", "attributer", "blueprint", "reviser",           "simplifier",
  };
  return kinds;
}

const std::vector<std::string>& recipe_topologies() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : topology_rules()) out.push_back(name);
    return out;
  }();
  return names;
}

bool RecipeSpec::has_enhancer(std::string_view kind) const { return enhancer(kind) != nullptr; }

const EnhancerConfig* RecipeSpec::enhancer(std::string_view kind) const {
  for (const auto& e : enhancers) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

const std::vector<std::string>& recipe_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.emplace_back(e.name);
    return out;
  }();
  return names;
}

RecipeSpec registry_recipe(std::string_view name) {
  for (const auto& e : registry()) {
    if (name != e.name) continue;
    RecipeSpec spec;
    spec.name = e.name;
    spec.topology = e.topology;
    spec.doc_view = e.view;
    spec.doc_count = e.doc_count;
    spec.generation_mode = e.mode;
    spec.enhancers = e.enhancers;
    return spec;
  }
  throw Error(ErrorKind::UnknownRecipe, "no recipe named '" + std::string(name) + "'");
}

std::string recipe_summary(const RecipeSpec& spec) {
  std::string out = "generator(" + std::string(to_string(spec.generation_mode)) + ")";
  for (const auto& e : spec.enhancers) out += " + " + e.kind;
  return out;
}

void validate_recipe(const RecipeSpec& spec) {
  if (spec.name.empty()) schema("name", "must not be empty");
  auto topo = topology_rules().find(spec.topology);
  if (topo == topology_rules().end()) schema("topology", "unknown topology '" + spec.topology + "'");
  if (spec.doc_count < 0) schema("doc_count", "must be >= 0");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < spec.enhancers.size(); ++i) {
    const auto& e = spec.enhancers[i];
    const std::string path = "enhancers[" + std::to_string(i) + "]";
    auto rules = option_rules().find(e.kind);
    if (rules == option_rules().end()) schema(path + ".kind", "unknown enhancer kind '" + e.kind + "'");
    if (!seen.insert(e.kind).second) schema(path + ".kind", "duplicate enhancer '" + e.kind + "'");
    for (const auto& [key, value] : e.options) {
      auto r = std::find_if(rules->second.begin(), rules->second.end(),
                            [&](const OptionRule& o) { return o.name == key; });
      if (r == rules->second.end()) schema(path + "." + key, "unknown option for " + e.kind);
      if (!(value >= r->min && value <= r->max)) schema(path + "." + key, "out of range");
      if (r->integral && std::floor(value) != value) schema(path + "." + key, "must be an integer");
    }
  }

  const TopologyRule& rule = topo->second;
  if (spec.topology != "sequence" && seen != rule.kinds) {
    std::string want;
    for (const auto& k : rule.kinds) want += (want.empty() ? "" : ", ") + k;
    schema("enhancers", "topology " + spec.topology + " takes exactly {" + want + "}");
  }
  if (rule.mode && *rule.mode != spec.generation_mode) {
    schema("generation_mode", "topology " + spec.topology + " generates " + std::string(to_string(*rule.mode)));
  }
  try {
    spec.params.validate();
  } catch (const Error& e) {
    schema("params", e.detail());
  }
  for (const auto& [role, body] : spec.prompts) {
    if (std::find(prompt_roles().begin(), prompt_roles().end(), role) == prompt_roles().end()) {
      schema("prompts." + role, "unknown prompt role");
    }
    if (!role_used(spec, role)) schema("prompts." + role, "not used by this recipe");
  }
  for (const auto& role : prompt_roles()) {
    if (!role_used(spec, role)) continue;
    try {
      const PromptTemplate tpl = make_prompt(spec, role);
      if (role == "answer" && spec.generation_mode == GenerationMode::iterative && !tpl.uses("prefix")) {
        schema("prompts.answer", "iterative generation needs a {prefix} placeholder");
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SchemaViolation) throw;
      schema("prompts." + role, e.detail());
    }
  }
}

RecipeSpec apply_overrides(RecipeSpec spec, const RecipeOverrides& overrides) {
  if (overrides.doc_count) spec.doc_count = *overrides.doc_count;
  if (overrides.doc_view) spec.doc_view = *overrides.doc_view;
  if (overrides.params) spec.params = *overrides.params;
  for (const auto& [role, body] : overrides.prompts) spec.prompts[role] = body;
  try {
    validate_recipe(spec);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidOverride, e.detail());
  }
  return spec;
}

BuiltRecipe build_recipe(const RecipeSpec& spec, const DatasetProfile& profile) {
  validate_recipe(spec);
  BuiltRecipe built;
  built.spec = spec;
  built.graph = wire(spec);
  built.graph.validate();
  built.options.top_n = static_cast<std::size_t>(spec.doc_count);
  built.options.init_docs_key = profile.init_docs_key;
  built.options.corpus_key = profile.corpus_key;
  return built;
}

BuiltRecipe build_recipe(std::string_view name, const RecipeOverrides& overrides, const DatasetProfile& profile) {
  return build_recipe(apply_overrides(registry_recipe(name), overrides), profile);
}

RecipeSpec parse_recipe(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    schema("$", std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) schema("$", "recipe must be an object");

  static const std::set<std::string> known = {"base",    "name",      "topology", "doc_view", "doc_count",
                                               "generation_mode", "enhancers", "prompts",  "params"};
  for (const auto& [key, _] : root.items()) {
    if (!known.count(key)) schema(key, "unknown field");
  }

  RecipeSpec spec;
  if (root.contains("base")) {
    const auto base = get_field<std::string>(root["base"], "base");
    try {
      spec = registry_recipe(base);
    } catch (const Error&) {
      schema("base", "unknown recipe '" + base + "'");
    }
  } else if (!root.contains("name")) {
    schema("name", "required without a base");
  }
  if (root.contains("name")) spec.name = get_field<std::string>(root["name"], "name");
  if (root.contains("topology")) spec.topology = get_field<std::string>(root["topology"], "topology");
  if (root.contains("doc_view")) {
    const auto v = get_field<std::string>(root["doc_view"], "doc_view");
    try {
      spec.doc_view = parse_doc_view(v);
    } catch (const Error&) {
      schema("doc_view", "expected full, snippet or summary");
    }
  }
  if (root.contains("doc_count")) {
    if (!root["doc_count"].is_number_integer()) schema("doc_count", "must be an integer");
    spec.doc_count = root["doc_count"].get<int>();
  }
  if (root.contains("generation_mode")) {
    const auto m = get_field<std::string>(root["generation_mode"], "generation_mode");
    if (m == "direct") {
      spec.generation_mode = GenerationMode::direct;
    } else if (m == "iterative") {
      spec.generation_mode = GenerationMode::iterative;
    } else {
      schema("generation_mode", "expected direct or iterative");
    }
  }
  if (root.contains("enhancers")) {
    const auto& list = root["enhancers"];
    if (!list.is_array()) schema("enhancers", "must be an array");
    spec.enhancers.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "enhancers[" + std::to_string(i) + "]";
      const auto& item = list[i];
      if (!item.is_object()) schema(path, "must be an object");
      if (!item.contains("kind")) schema(path + ".kind", "required");
      EnhancerConfig e;
      e.kind = get_field<std::string>(item["kind"], path + ".kind");
      for (const auto& [key, value] : item.items()) {
        if (key == "kind") continue;
        if (!value.is_number()) schema(path + "." + key, "must be a number");
        e.options[key] = value.get<double>();
      }
      spec.enhancers.push_back(std::move(e));
    }
  }
  if (root.contains("prompts")) {
    const auto& p = root["prompts"];
    if (!p.is_object()) schema("prompts", "must be an object");
    for (const auto& [role, body] : p.items()) {
      spec.prompts[role] = get_field<std::string>(body, "prompts." + role);
    }
  }
  if (root.contains("params")) {
    const auto& p = root["params"];
    if (!p.is_object()) schema("params", "must be an object");
    for (const auto& [key, value] : p.items()) {
      const std::string path = "params." + key;
      if (key == "max_new_tokens") {
        if (!value.is_number_integer()) schema(path, "must be an integer");
        spec.params.max_new_tokens = value.get<int>();
      } else if (key == "temperature") {
        if (!value.is_number()) schema(path, "must be a number");
        spec.params.temperature = value.get<double>();
      } else if (key == "stop") {
        spec.params.stop = get_field<std::vector<std::string>>(value, path);
      } else {
        schema(path, "unknown field");
      }
    }
  }
  validate_recipe(spec);
  return spec;
}

RecipeSpec load_recipe_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileUnreadable, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_recipe(ss.str());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SchemaViolation) throw;
    throw Error(ErrorKind::SchemaViolation, path.filename().string() + ": " + e.detail());
  }
}

std::string emit_recipe(const RecipeSpec& spec) {
  json enhancers = json::array();
  for (const auto& e : spec.enhancers) {
    json item = {{"kind", e.kind}};
    for (const auto& [k, v] : e.options) item[k] = number_json(v);
    enhancers.push_back(std::move(item));
  }
  json prompts = json::object();
  for (const auto& [role, body] : spec.prompts) prompts[role] = body;
  json root = {{"name", spec.name},
               {"topology", spec.topology},
               {"doc_view", std::string(to_string(spec.doc_view))},
               {"doc_count", spec.doc_count},
               {"generation_mode", std::string(to_string(spec.generation_mode))},
               {"enhancers", enhancers},
               {"prompts", prompts},
               {"params", params_json(spec.params)}};
  return root.dump(2) + "\n";
}

RecipeSpec resolve_recipe(std::string_view ref) {
  const auto& names = recipe_names();
  if (std::find(names.begin(), names.end(), ref) != names.end()) return registry_recipe(ref);
  const std::filesystem::path path{std::string(ref)};
  std::error_code ec;
  if (std::filesystem::is_regular_file(path, ec)) return load_recipe_file(path);
  throw Error(ErrorKind::UnknownRecipe, "'" + std::string(ref) + "' is neither a recipe name nor a recipe file");
}

}  // namespace citekit
