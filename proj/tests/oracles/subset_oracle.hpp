#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

// Citation precision and granularity over an abstract fact model: a span
// carries a set of facts and a token count, a statement needs a set of facts,
// and a set of spans supports a statement iff it covers every needed fact.
// Both metrics are computed by enumerating subsets.
namespace oracle {

struct FactSpan {
  std::set<int> facts;
  std::size_t tokens = 0;
};

struct FactStatement {
  std::set<int> needed;
  /// One entry per citation: the spans that citation points at.
  std::vector<std::vector<int>> citations;
};

inline bool covers(const std::vector<FactSpan>& spans, const std::vector<int>& chosen, const std::set<int>& needed) {
  if (chosen.empty()) return false;
  std::set<int> have;
  for (int s : chosen) have.insert(spans[static_cast<std::size_t>(s)].facts.begin(),
                                   spans[static_cast<std::size_t>(s)].facts.end());
  return std::includes(have.begin(), have.end(), needed.begin(), needed.end());
}

inline std::vector<int> union_of(const std::vector<std::vector<int>>& cites, std::uint32_t mask) {
  std::vector<int> out;
  for (std::size_t i = 0; i < cites.size(); ++i) {
    if (!(mask & (1u << i))) continue;
    for (int s : cites[i]) {
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
  }
  return out;
}

/// nullopt when nothing is cited.
inline std::optional<double> precision(const std::vector<FactSpan>& spans, const std::vector<FactStatement>& answer) {
  std::size_t total = 0;
  std::size_t relevant = 0;
  for (const auto& st : answer) {
    const std::size_t n = st.citations.size();
    if (n == 0) continue;
    // Support of every citation subset.
    std::vector<bool> support(1u << n);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      support[mask] = covers(spans, union_of(st.citations, mask), st.needed);
    }
    const std::uint32_t all = (1u << n) - 1;
    for (std::size_t i = 0; i < n; ++i) {
      ++total;
      const bool alone = support[1u << i];
      const bool without = support[all & ~(1u << i)];
      if (alone || (support[all] && !without)) ++relevant;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(relevant) / static_cast<double>(total);
}

/// Mean over supported statements of tokens(smallest supporting subset of the
/// cited spans) / tokens(all cited spans). nullopt when none is supported.
inline std::optional<double> granularity(const std::vector<FactSpan>& spans, const std::vector<FactStatement>& answer) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& st : answer) {
    if (st.citations.empty()) continue;
    const auto cited = union_of(st.citations, (1u << st.citations.size()) - 1);
    if (!covers(spans, cited, st.needed)) continue;
    std::size_t all_tokens = 0;
    for (int s : cited) all_tokens += spans[static_cast<std::size_t>(s)].tokens;
    std::size_t best = all_tokens;
    for (std::uint32_t mask = 1; mask < (1u << cited.size()); ++mask) {
      std::vector<int> chosen;
      std::size_t tokens = 0;
      for (std::size_t i = 0; i < cited.size(); ++i) {
        if (mask & (1u << i)) {
          chosen.push_back(cited[i]);
          tokens += spans[static_cast<std::size_t>(cited[i])].tokens;
        }
      }
      if (tokens < best && covers(spans, chosen, st.needed)) best = tokens;
    }
    sum += all_tokens == 0 ? 0.0 : static_cast<double>(best) / static_cast<double>(all_tokens);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace oracle
