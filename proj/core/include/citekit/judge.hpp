#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "citekit/document.hpp"

namespace citekit {

/// Decides whether `premise` supports `hypothesis`.
class Judge {
public:
  virtual ~Judge() = default;

  virtual bool entails(std::string_view premise, std::string_view hypothesis) = 0;
  virtual std::string id() const = 0;
  /// Fresh instance with the same configuration; stateful judges restart.
  virtual std::unique_ptr<Judge> fork() const = 0;
};

/// Content-token coverage of the hypothesis by the premise, as multisets. A
/// hypothesis without content words is never entailed.
class LexicalJudge final : public Judge {
public:
  explicit LexicalJudge(double threshold = 0.6);  // threshold in (0, 1]

  bool entails(std::string_view premise, std::string_view hypothesis) override;
  std::string id() const override;
  std::unique_ptr<Judge> fork() const override;
  double threshold() const noexcept { return threshold_; }

private:
  double threshold_;
};

/// Normalized hypothesis occurs verbatim inside the normalized premise.
class SubstringJudge final : public Judge {
public:
  bool entails(std::string_view premise, std::string_view hypothesis) override;
  std::string id() const override { return "substring"; }
  std::unique_ptr<Judge> fork() const override;
};

/// POST {"premise", "hypothesis"} -> {"entailed": bool}.
class HttpNliJudge final : public Judge {
public:
  explicit HttpNliJudge(std::string url, int timeout_seconds = 60, int retries = 2);

  bool entails(std::string_view premise, std::string_view hypothesis) override;
  std::string id() const override { return "http:" + url_; }
  std::unique_ptr<Judge> fork() const override;

private:
  std::string url_;
  int timeout_seconds_;
  int retries_;
};

/// Returns verdicts in order, then keeps repeating the last one.
class ScriptedJudge final : public Judge {
public:
  explicit ScriptedJudge(std::vector<bool> verdicts);

  bool entails(std::string_view premise, std::string_view hypothesis) override;
  std::string id() const override;
  std::unique_ptr<Judge> fork() const override;
  std::size_t calls() const noexcept { return calls_; }

private:
  std::vector<bool> verdicts_;
  std::size_t calls_ = 0;
};

/// "lexical[:t]", "substring", "http:<url>" or "scripted:true,false,...".
std::unique_ptr<Judge> make_judge(std::string_view spec);

/// True when the joint text of `citations` entails `hypothesis`. Nothing
/// cited, or nothing resolvable in `store`, entails nothing.
bool citations_entail(Judge& judge, const std::vector<Citation>& citations, const DocStore& store,
                      std::string_view hypothesis);
bool spans_entail(Judge& judge, const std::vector<SpanRef>& spans, const DocStore& store,
                  std::string_view hypothesis);

}  // namespace citekit
