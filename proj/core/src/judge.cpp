#include "citekit/judge.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "citekit/error.hpp"
#include "citekit/text.hpp"
#include "http_client.hpp"

namespace citekit {

LexicalJudge::LexicalJudge(double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "lexical threshold must be in (0, 1]");
  }
}

bool LexicalJudge::entails(std::string_view premise, std::string_view hypothesis) {
  const auto hyp = text::content_tokens(hypothesis);
  if (hyp.empty()) return false;
  const auto prem = text::content_tokens(premise);
  const double covered = static_cast<double>(text::multiset_overlap(hyp, prem));
  return covered + 1e-9 >= threshold_ * static_cast<double>(hyp.size());
}

std::string LexicalJudge::id() const {
  std::ostringstream os;
  os << "lexical:" << threshold_;
  return os.str();
}

std::unique_ptr<Judge> LexicalJudge::fork() const { return std::make_unique<LexicalJudge>(threshold_); }

bool SubstringJudge::entails(std::string_view premise, std::string_view hypothesis) {
  const auto hyp = text::normalize_for_match(hypothesis);
  if (hyp.empty()) return false;
  return text::normalize_for_match(premise).find(hyp) != std::string::npos;
}

std::unique_ptr<Judge> SubstringJudge::fork() const { return std::make_unique<SubstringJudge>(); }

HttpNliJudge::HttpNliJudge(std::string url, int timeout_seconds, int retries)
    : url_(std::move(url)), timeout_seconds_(timeout_seconds), retries_(retries) {
  detail::parse_url(url_);
}

bool HttpNliJudge::entails(std::string_view premise, std::string_view hypothesis) {
  using json = nlohmann::json;
  const auto url = detail::parse_url(url_);
  const std::string body =
      json{{"premise", std::string(premise)}, {"hypothesis", std::string(hypothesis)}}.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
    auto res = detail::post_json(url, "", body, {}, timeout_seconds_);
    if (!res.transport_ok) {
      last_error = "transport error: " + res.error;
      continue;
    }
    if (res.status == 429 || res.status >= 500) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status != 200) {
      throw Error(ErrorKind::JudgeUnavailable, "HTTP " + std::to_string(res.status));
    }
    try {
      auto reply = json::parse(res.body);
      const auto& flag = reply.at("entailed");
      if (!flag.is_boolean()) throw Error(ErrorKind::JudgeUnavailable, "'entailed' is not a boolean");
      return flag.get<bool>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::JudgeUnavailable, std::string("malformed reply: ") + e.what());
    }
  }
  throw Error(ErrorKind::JudgeUnavailable, last_error, /*retryable=*/true);
}

std::unique_ptr<Judge> HttpNliJudge::fork() const {
  return std::make_unique<HttpNliJudge>(url_, timeout_seconds_, retries_);
}

ScriptedJudge::ScriptedJudge(std::vector<bool> verdicts) : verdicts_(std::move(verdicts)) {
  if (verdicts_.empty()) throw Error(ErrorKind::InvalidConfig, "scripted judge needs at least one verdict");
}

bool ScriptedJudge::entails(std::string_view, std::string_view) {
  const std::size_t i = std::min(calls_, verdicts_.size() - 1);
  ++calls_;
  return verdicts_[i];
}

std::string ScriptedJudge::id() const {
  std::string out = "scripted:";
  for (std::size_t i = 0; i < verdicts_.size(); ++i) {
    if (i) out += ',';
    out += verdicts_[i] ? "true" : "false";
  }
  return out;
}

std::unique_ptr<Judge> ScriptedJudge::fork() const { return std::make_unique<ScriptedJudge>(verdicts_); }

std::unique_ptr<Judge> make_judge(std::string_view spec) {
  if (spec == "substring") return std::make_unique<SubstringJudge>();
  if (spec == "lexical") return std::make_unique<LexicalJudge>();
  if (spec.rfind("lexical:", 0) == 0) {
    const auto num = std::string(spec.substr(8));
    std::size_t used = 0;
    double t = 0;
    try {
      t = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size()) {
      throw Error(ErrorKind::InvalidConfig, "bad lexical threshold '" + num + "'");
    }
    return std::make_unique<LexicalJudge>(t);
  }
  if (spec.rfind("http:", 0) == 0) {
    auto url = spec.substr(5);
    if (url.rfind("//", 0) == 0) url = spec;  // accept a bare http://... URL too
    return std::make_unique<HttpNliJudge>(std::string(url));
  }
  if (spec.rfind("https://", 0) == 0) return std::make_unique<HttpNliJudge>(std::string(spec));
  if (spec.rfind("scripted:", 0) == 0) {
    std::vector<bool> verdicts;
    std::stringstream ss{std::string(spec.substr(9))};
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto v = text::to_lower(text::trim(item));
      if (v == "true" || v == "1") {
        verdicts.push_back(true);
      } else if (v == "false" || v == "0") {
        verdicts.push_back(false);
      } else {
        throw Error(ErrorKind::InvalidConfig, "bad scripted verdict '" + std::string(item) + "'");
      }
    }
    return std::make_unique<ScriptedJudge>(std::move(verdicts));
  }
  throw Error(ErrorKind::InvalidConfig, "unknown judge spec '" + std::string(spec) + "'");
}

bool citations_entail(Judge& judge, const std::vector<Citation>& citations, const DocStore& store,
                      std::string_view hypothesis) {
  if (citations.empty()) return false;
  const auto premise = cited_text(citations, store);
  if (premise.empty()) return false;
  return judge.entails(premise, hypothesis);
}

bool spans_entail(Judge& judge, const std::vector<SpanRef>& spans, const DocStore& store,
                  std::string_view hypothesis) {
  if (spans.empty()) return false;
  const auto premise = spans_text(spans, store);
  if (premise.empty()) return false;
  return judge.entails(premise, hypothesis);
}

}  // namespace citekit
