#include "citekit/llm.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "citekit/error.hpp"
#include "citekit/text.hpp"
#include "http_client.hpp"

namespace citekit {

using json = nlohmann::json;

namespace {

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

/// Walks a template body, calling `literal` for plain text and `placeholder`
/// for each {name}.
template <typename Literal, typename Placeholder>
void scan_template(std::string_view body, Literal&& literal, Placeholder&& placeholder) {
  std::size_t i = 0;
  std::size_t plain = 0;
  auto flush = [&](std::size_t upto) {
    if (upto > plain) literal(body.substr(plain, upto - plain));
  };
  while (i < body.size()) {
    if (body.compare(i, 2, "{{") == 0 || body.compare(i, 2, "}}") == 0) {
      flush(i);
      literal(body.substr(i, 1));
      i += 2;
      plain = i;
      continue;
    }
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && is_ident_char(body[j])) ++j;
      if (j > i + 1 && j < body.size() && body[j] == '}') {
        flush(i);
        placeholder(body.substr(i + 1, j - i - 1));
        i = j + 1;
        plain = i;
        continue;
      }
    }
    ++i;
  }
  flush(body.size());
}

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stops) {
  std::size_t cut = text.size();
  for (const auto& s : stops) {
    if (s.empty()) continue;
    auto pos = text.find(s);
    if (pos != std::string::npos) cut = std::min(cut, pos);
  }
  text.resize(cut);
  return text;
}

bool starts_with_ci(std::string_view text, std::string_view prefix) {
  if (prefix.empty() || text.size() < prefix.size()) return false;
  return text::to_lower(text.substr(0, prefix.size())) == text::to_lower(prefix);
}

}  // namespace

void GenParams::validate() const {
  if (max_new_tokens <= 0) {
    throw Error(ErrorKind::InvalidParams, "max_new_tokens must be positive");
  }
  if (!(temperature >= 0.0)) throw Error(ErrorKind::InvalidParams, "temperature must be >= 0");
}

const std::vector<std::string>& PromptTemplate::declared() {
  static const std::vector<std::string> names = {"question", "docs", "prefix", "feedback", "plan"};
  return names;
}

PromptTemplate::PromptTemplate(std::string body, DocView doc_render)
    : body_(std::move(body)), doc_render_(doc_render) {
  const auto& known = declared();
  scan_template(
      body_, [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(known.begin(), known.end(), name) == known.end()) {
          throw Error(ErrorKind::InvalidTemplate, "undeclared placeholder {" + std::string(name) + "}");
        }
        if (!uses(name)) placeholders_.emplace_back(name);
      });
}

bool PromptTemplate::uses(std::string_view name) const {
  return std::find(placeholders_.begin(), placeholders_.end(), name) != placeholders_.end();
}

std::string render_documents(const DocStore& store, const std::vector<int>& doc_ids, DocView view,
                             const std::map<int, DocView>& view_overrides,
                             std::vector<int>* fallbacks) {
  std::string out;
  for (int id : doc_ids) {
    const Document& doc = store.get(id);
    auto ov = view_overrides.find(id);
    const DocView v = ov == view_overrides.end() ? view : ov->second;
    bool fell_back = false;
    auto body = doc.view_text(v, &fell_back);
    if (fell_back && fallbacks != nullptr) fallbacks->push_back(id);
    if (!out.empty()) out.push_back('\n');
    out += "Document [" + std::to_string(id) + "](Title: " + doc.title + "): ";
    out += body;
  }
  return out;
}

RenderedPrompt render_prompt(const PromptTemplate& tpl, const Bindings& bindings,
                             const DocStore& store, const std::vector<int>& doc_ids,
                             const std::map<int, DocView>& view_overrides) {
  RenderedPrompt out;
  std::string docs_block;
  if (tpl.uses("docs")) {
    docs_block = render_documents(store, doc_ids, tpl.doc_render(), view_overrides,
                                  &out.fallback_doc_ids);
  }
  scan_template(
      tpl.body(), [&](std::string_view lit) { out.text.append(lit); },
      [&](std::string_view name) {
        if (name == "docs") {
          out.text += docs_block;
          return;
        }
        auto it = bindings.find(std::string(name));
        if (it == bindings.end()) {
          throw Error(ErrorKind::UnboundPlaceholder, "no binding for {" + std::string(name) + "}");
        }
        out.text += it->second;
      });
  return out;
}

Completion LLMBackend::generate(std::string_view prompt, const GenParams& params) {
  if (text::trim(prompt).empty()) throw Error(ErrorKind::InvalidParams, "prompt is empty");
  params.validate();

  Completion c;
  if (serial()) {
    std::lock_guard lock(serial_mutex_);
    c = do_generate(prompt, params);
  } else {
    c = do_generate(prompt, params);
  }
  c.text = truncate_at_stop(std::move(c.text), params.stop);
  const auto head = text::trim(c.text);
  for (const auto& p : refusal_prefixes_) {
    if (starts_with_ci(head, p)) throw Error(ErrorKind::BackendRefusal, std::string(head));
  }
  return c;
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> queue, bool cycle)
    : ScriptedBackend(std::vector<Rule>{Rule{"", std::move(queue), cycle}}) {}

ScriptedBackend::ScriptedBackend(std::vector<Rule> rules)
    : rules_(std::move(rules)), cursor_(rules_.size(), 0) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("scripted backend: ") + e.what());
  }
  auto strings = [](const json& arr, const char* what) {
    if (!arr.is_array()) throw Error(ErrorKind::InvalidConfig, std::string(what) + " must be an array");
    std::vector<std::string> out;
    for (const auto& s : arr) {
      if (!s.is_string()) {
        throw Error(ErrorKind::InvalidConfig, std::string(what) + " entries must be strings");
      }
      out.push_back(s.get<std::string>());
    }
    return out;
  };

  if (root.is_array()) return std::make_unique<ScriptedBackend>(strings(root, "script"));
  if (!root.is_object() || !root.contains("rules")) {
    throw Error(ErrorKind::InvalidConfig, "scripted backend needs an array or {\"rules\": [...]}");
  }
  std::vector<Rule> rules;
  for (const auto& r : root.at("rules")) {
    Rule rule;
    rule.trigger = r.value("trigger", "");
    rule.responses = strings(r.at("responses"), "responses");
    rule.cycle = r.value("cycle", false);
    rules.push_back(std::move(rule));
  }
  auto backend = std::make_unique<ScriptedBackend>(std::move(rules));
  if (root.contains("refusal_prefixes")) {
    backend->set_refusal_prefixes(strings(root.at("refusal_prefixes"), "refusal_prefixes"));
  }
  return backend;
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileUnreadable, "cannot open script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::unique_ptr<LLMBackend> ScriptedBackend::fork() const {
  auto copy = std::make_unique<ScriptedBackend>(rules_);
  copy->set_refusal_prefixes(refusal_prefixes());
  return copy;
}

Completion ScriptedBackend::do_generate(std::string_view prompt, const GenParams&) {
  prompts_.emplace_back(prompt);
  auto try_rule = [&](std::size_t i) -> std::optional<std::string> {
    const Rule& r = rules_[i];
    if (r.responses.empty()) return std::nullopt;
    if (cursor_[i] >= r.responses.size()) {
      if (!r.cycle) return std::nullopt;
      cursor_[i] = 0;
    }
    return r.responses[cursor_[i]++];
  };
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i].trigger.empty() || prompt.find(rules_[i].trigger) == std::string_view::npos) continue;
    if (auto text = try_rule(i)) return {std::move(*text), id(), std::nullopt};
  }
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (!rules_[i].trigger.empty()) continue;
    if (auto text = try_rule(i)) return {std::move(*text), id(), std::nullopt};
  }
  throw Error(ErrorKind::BackendUnavailable, "script exhausted after " +
                                                 std::to_string(prompts_.size() - 1) + " calls");
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  detail::parse_url(config_.base_url);
  if (config_.model.empty()) throw Error(ErrorKind::InvalidConfig, "http backend needs a model name");
}

std::unique_ptr<LLMBackend> HttpBackend::fork() const {
  auto copy = std::make_unique<HttpBackend>(config_);
  copy->set_refusal_prefixes(refusal_prefixes());
  return copy;
}

Completion HttpBackend::do_generate(std::string_view prompt, const GenParams& params) {
  const auto url = detail::parse_url(config_.base_url);
  json request = {
      {"model", config_.model},
      {"messages", json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", params.temperature},
      {"max_tokens", params.max_new_tokens},
  };
  if (!params.stop.empty()) request["stop"] = params.stop;

  std::map<std::string, std::string> headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers["Authorization"] = std::string("Bearer ") + key;
  }

  const std::string body = request.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
    auto res = detail::post_json(url, "/chat/completions", body, headers, config_.timeout_seconds);
    if (!res.transport_ok) {
      last_error = "transport error: " + res.error;
      continue;
    }
    if (res.status == 429 || res.status >= 500) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status != 200) {
      throw Error(ErrorKind::BackendUnavailable,
                  "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 512));
    }
    json reply;
    try {
      reply = json::parse(res.body);
      const auto& choice = reply.at("choices").at(0);
      if (choice.value("finish_reason", "") == "content_filter") {
        throw Error(ErrorKind::BackendRefusal, "response blocked by content filter");
      }
      Completion c;
      const auto& content = choice.at("message").at("content");
      c.text = content.is_string() ? content.get<std::string>() : std::string();
      c.backend_id = id();
      if (reply.contains("usage") && reply["usage"].is_object()) {
        c.usage = TokenUsage{reply["usage"].value("prompt_tokens", 0),
                             reply["usage"].value("completion_tokens", 0)};
      }
      return c;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::BackendUnavailable, std::string("malformed completion: ") + e.what());
    }
  }
  throw Error(ErrorKind::BackendUnavailable, last_error, /*retryable=*/true);
}

std::unique_ptr<LLMBackend> make_backend(std::string_view spec) {
  if (spec.rfind("scripted:", 0) == 0) return ScriptedBackend::load(std::string(spec.substr(9)));
  if (spec.rfind("http:", 0) == 0) {
    auto rest = spec.substr(5);
    auto comma = rest.rfind(',');
    if (comma == std::string_view::npos) {
      throw Error(ErrorKind::InvalidConfig, "backend spec must be http:<base-url>,<model>");
    }
    HttpBackendConfig cfg;
    cfg.base_url = std::string(rest.substr(0, comma));
    cfg.model = std::string(rest.substr(comma + 1));
    return std::make_unique<HttpBackend>(std::move(cfg));
  }
  throw Error(ErrorKind::InvalidConfig, "unknown backend spec '" + std::string(spec) + "'");
}

Completion generate(LLMBackend& backend, std::string_view prompt, const GenParams& params) {
  return backend.generate(prompt, params);
}

std::vector<Completion> generate_iterative(LLMBackend& backend, const PromptTemplate& tpl,
                                           Bindings bindings,
                                           const std::function<bool(std::string_view)>& stop_condition,
                                           int max_turns, const GenParams& params,
                                           const DocContext& docs) {
  if (max_turns < 1) throw Error(ErrorKind::InvalidParams, "max_turns must be >= 1");
  static const DocStore kEmpty;
  const DocStore& store = docs.store != nullptr ? *docs.store : kEmpty;

  std::vector<Completion> out;
  std::string prefix;
  for (int turn = 0; turn < max_turns; ++turn) {
    bindings["prefix"] = prefix;
    Completion c;
    try {
      auto prompt = render_prompt(tpl, bindings, store, docs.doc_ids);
      c = backend.generate(prompt.text, params);
    } catch (const Error& e) {
      throw Error(e.kind(), "turn " + std::to_string(turn + 1) + ": " + e.detail(), e.retryable());
    }
    if (stop_condition && stop_condition(c.text)) break;
    const auto sentence = text::trim(c.text);
    if (!sentence.empty()) prefix = prefix.empty() ? std::string(sentence) : prefix + " " + std::string(sentence);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace citekit
