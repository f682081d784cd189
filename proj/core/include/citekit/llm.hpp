#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citekit/document.hpp"

namespace citekit {

struct GenParams {
  int max_new_tokens = 500;
  double temperature = 0.5;
  std::vector<std::string> stop{"\n"};

  /// Throws InvalidParams.
  void validate() const;
  friend bool operator==(const GenParams&, const GenParams&) = default;
};

/// Prompt body with {question} {docs} {prefix} {feedback} {plan} placeholders.
/// "{{" and "}}" render literal braces.
class PromptTemplate {
public:
  PromptTemplate() = default;
  /// Throws InvalidTemplate when the body names an undeclared placeholder.
  explicit PromptTemplate(std::string body, DocView doc_render = DocView::full);

  const std::string& body() const noexcept { return body_; }
  DocView doc_render() const noexcept { return doc_render_; }
  const std::vector<std::string>& placeholders() const noexcept { return placeholders_; }
  bool uses(std::string_view name) const;

  static const std::vector<std::string>& declared();

  friend bool operator==(const PromptTemplate& a, const PromptTemplate& b) {
    return a.body_ == b.body_ && a.doc_render_ == b.doc_render_;
  }

private:
  std::string body_;
  DocView doc_render_ = DocView::full;
  std::vector<std::string> placeholders_;
};

using Bindings = std::map<std::string, std::string>;

struct RenderedPrompt {
  std::string text;
  /// Documents whose requested view was missing and rendered as full text.
  std::vector<int> fallback_doc_ids;
};

/// "Document [k](Title: t): body" lines in `doc_ids` order.
std::string render_documents(const DocStore& store, const std::vector<int>& doc_ids, DocView view,
                             const std::map<int, DocView>& view_overrides = {},
                             std::vector<int>* fallbacks = nullptr);

/// {docs} is always bound from `store` and `doc_ids`; every other placeholder
/// in the body needs an entry in `bindings`.
RenderedPrompt render_prompt(const PromptTemplate& tpl, const Bindings& bindings,
                             const DocStore& store, const std::vector<int>& doc_ids,
                             const std::map<int, DocView>& view_overrides = {});

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

struct Completion {
  std::string text;
  std::string backend_id;
  std::optional<TokenUsage> usage;
};

/// Uniform generation contract. Callers use generate(); implementations
/// override do_generate(). Stop-string truncation and refusal detection are
/// applied here, so every backend behaves the same way.
class LLMBackend {
public:
  virtual ~LLMBackend() = default;

  Completion generate(std::string_view prompt, const GenParams& params);

  virtual std::string id() const = 0;
  /// Serial backends get their calls serialized by this class.
  virtual bool serial() const { return false; }
  /// Fresh instance with the same configuration and initial state.
  virtual std::unique_ptr<LLMBackend> fork() const = 0;

  void set_refusal_prefixes(std::vector<std::string> prefixes) {
    refusal_prefixes_ = std::move(prefixes);
  }
  const std::vector<std::string>& refusal_prefixes() const noexcept { return refusal_prefixes_; }

protected:
  LLMBackend() = default;
  LLMBackend(const LLMBackend& other) : refusal_prefixes_(other.refusal_prefixes_) {}

private:
  virtual Completion do_generate(std::string_view prompt, const GenParams& params) = 0;

  std::vector<std::string> refusal_prefixes_;
  std::mutex serial_mutex_;
};

/// Canned responses. Rules are tried in order; a rule with a trigger fires only
/// when the trigger occurs in the prompt. The rule without trigger is the
/// default queue. Exhausted non-cycling rules are skipped.
class ScriptedBackend final : public LLMBackend {
public:
  struct Rule {
    std::string trigger;
    std::vector<std::string> responses;
    bool cycle = false;
  };

  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<std::string> queue, bool cycle = false);
  explicit ScriptedBackend(std::vector<Rule> rules);

  /// Accepts a JSON array of strings (default queue) or
  /// {"rules": [{"trigger", "responses", "cycle"}], "refusal_prefixes": [...]}.
  static std::unique_ptr<ScriptedBackend> from_json(std::string_view json_text);
  static std::unique_ptr<ScriptedBackend> load(const std::filesystem::path& path);

  std::string id() const override { return "scripted"; }
  bool serial() const override { return true; }
  std::unique_ptr<LLMBackend> fork() const override;

  const std::vector<std::string>& prompts() const noexcept { return prompts_; }
  std::size_t calls() const noexcept { return prompts_.size(); }

private:
  Completion do_generate(std::string_view prompt, const GenParams& params) override;

  std::vector<Rule> rules_;
  std::vector<std::size_t> cursor_;
  std::vector<std::string> prompts_;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string model;
  std::string api_key_env = "CITEKIT_API_KEY";
  int timeout_seconds = 120;
  int retries = 2;
};

/// Chat-completion endpoint client: POST <base>/chat/completions.
class HttpBackend final : public LLMBackend {
public:
  explicit HttpBackend(HttpBackendConfig config);

  std::string id() const override { return "http:" + config_.model; }
  std::unique_ptr<LLMBackend> fork() const override;
  const HttpBackendConfig& config() const noexcept { return config_; }

private:
  Completion do_generate(std::string_view prompt, const GenParams& params) override;

  HttpBackendConfig config_;
};

/// "scripted:<file>" or "http:<base-url>,<model>".
std::unique_ptr<LLMBackend> make_backend(std::string_view spec);

Completion generate(LLMBackend& backend, std::string_view prompt, const GenParams& params = {});

struct DocContext {
  const DocStore* store = nullptr;
  std::vector<int> doc_ids;
};

/// Sentence-by-sentence generation. Each turn renders the template with
/// {prefix} = accepted prior completions joined by spaces. A completion for
/// which `stop_condition` holds ends the loop and is not returned.
std::vector<Completion> generate_iterative(LLMBackend& backend, const PromptTemplate& tpl,
                                           Bindings bindings,
                                           const std::function<bool(std::string_view)>& stop_condition,
                                           int max_turns, const GenParams& params = {},
                                           const DocContext& docs = {});

}  // namespace citekit
