#include "citekit/text.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <unordered_map>

#include "citekit/error.hpp"

namespace citekit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::FileUnreadable: return "FileUnreadable";
    case ErrorKind::FileUnwritable: return "FileUnwritable";
    case ErrorKind::MalformedDataset: return "MalformedDataset";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::CapacityExceeded: return "CapacityExceeded";
    case ErrorKind::InvalidDocument: return "InvalidDocument";
    case ErrorKind::InvalidTemplate: return "InvalidTemplate";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::UnboundPlaceholder: return "UnboundPlaceholder";
    case ErrorKind::UnknownDocId: return "UnknownDocId";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::BackendRefusal: return "BackendRefusal";
    case ErrorKind::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::StepBudgetExhausted: return "StepBudgetExhausted";
    case ErrorKind::NodeFailure: return "NodeFailure";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::RetrievalRefused: return "RetrievalRefused";
    case ErrorKind::EmptyPlan: return "EmptyPlan";
    case ErrorKind::UnparseablePlan: return "UnparseablePlan";
    case ErrorKind::JudgeUnavailable: return "JudgeUnavailable";
    case ErrorKind::UnknownMetric: return "UnknownMetric";
    case ErrorKind::UnknownRecipe: return "UnknownRecipe";
    case ErrorKind::InvalidOverride: return "InvalidOverride";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::AlignmentError: return "AlignmentError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace citekit

namespace citekit::text {

namespace {

// 50 function words; content tokens are everything else.
const std::vector<std::string_view> kStopwords = {
    "a",     "an",    "the",   "and",  "or",   "but",   "if",    "of",   "to",   "in",
    "on",    "at",    "by",    "for",  "with", "from",  "as",    "is",   "are",  "was",
    "were",  "be",    "been",  "being", "it",  "its",   "this",  "that", "these", "those",
    "he",    "she",   "they",  "them", "his",  "her",   "their", "has",  "have", "had",
    "do",    "does",  "did",   "not",  "no",   "which", "who",   "what", "when", "there",
};

}  // namespace

bool is_word_byte(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_space_byte(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space_byte(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space_byte(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space_byte(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space_byte(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space_byte(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_word_byte(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && is_word_byte(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(to_lower(s.substr(start, i - start)));
  }
  return out;
}

std::vector<std::string> content_tokens(std::string_view s) {
  auto tokens = word_tokens(s);
  std::erase_if(tokens, [](const std::string& t) { return is_stopword(t); });
  return tokens;
}

bool is_stopword(std::string_view token) noexcept {
  return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

const std::vector<std::string_view>& stopwords() { return kStopwords; }

std::string normalize_for_match(std::string_view s) {
  std::string stripped;
  stripped.reserve(s.size());
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && !is_word_byte(u) && !is_space_byte(u)) continue;
    stripped.push_back(c);
  }
  return to_lower(normalize_whitespace(stripped));
}

std::string digest(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::size_t multiset_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& t : b) ++counts[t];
  std::size_t hits = 0;
  for (const auto& t : a) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

}  // namespace citekit::text
