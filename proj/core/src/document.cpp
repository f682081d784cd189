#include "citekit/document.hpp"

#include <algorithm>
#include <set>

#include "citekit/error.hpp"
#include "citekit/text.hpp"

namespace citekit {

namespace {

constexpr std::size_t kMaxMarkerDigits = 9;

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closing_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')';
}

/// End offset of a "[digits]" marker starting at `pos`, or npos.
std::size_t marker_end(std::string_view text, std::size_t pos, int* doc_id = nullptr) {
  if (pos >= text.size() || text[pos] != '[') return std::string_view::npos;
  std::size_t i = pos + 1;
  int value = 0;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    value = value * 10 + (text[i] - '0');
    ++i;
    if (i - pos - 1 > kMaxMarkerDigits) return std::string_view::npos;
  }
  if (i == pos + 1 || i >= text.size() || text[i] != ']') return std::string_view::npos;
  if (doc_id != nullptr) *doc_id = value;
  return i + 1;
}

std::size_t marker_run_end(std::string_view text, std::size_t pos) {
  std::size_t k = pos;
  for (std::size_t e = marker_end(text, k); e != std::string_view::npos; e = marker_end(text, k)) {
    k = e;
  }
  return k;
}

std::string strip_once(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t run = marker_run_end(text, i);
    if (run == i) {
      out.push_back(text[i++]);
      continue;
    }
    bool at_end = run == text.size();
    char next = at_end ? '\0' : text[run];
    bool next_space = !at_end && text::is_space_byte(static_cast<unsigned char>(next));
    if (!out.empty() && text::is_space_byte(static_cast<unsigned char>(out.back())) &&
        (at_end || next_space || is_closing_punct(next))) {
      while (!out.empty() && text::is_space_byte(static_cast<unsigned char>(out.back()))) {
        out.pop_back();
      }
    } else if (!out.empty() && text::is_word_byte(static_cast<unsigned char>(out.back())) &&
               !at_end && text::is_word_byte(static_cast<unsigned char>(next))) {
      out.push_back(' ');
    }
    i = run;
  }
  return text::normalize_whitespace(out);
}

std::vector<Citation> citations_in(std::string_view raw) {
  std::vector<Citation> out;
  std::set<int> seen;
  for (const auto& m : find_markers(raw)) {
    if (seen.insert(m.doc_id).second) out.push_back(Citation::whole(m.doc_id));
  }
  return out;
}

bool has_word(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return text::is_word_byte(static_cast<unsigned char>(c)); });
}

Statement make_statement(std::string raw) {
  Statement st;
  st.text = strip_citations(raw);
  st.citations = citations_in(raw);
  st.raw = std::move(raw);
  return st;
}

std::optional<CharRange> locate_snippet(const Document& doc, const std::string& snippet) {
  auto pos = doc.text.find(snippet);
  if (pos == std::string::npos) return std::nullopt;
  return CharRange{pos, pos + snippet.size()};
}

}  // namespace

std::string_view to_string(DocOrigin origin) {
  return origin == DocOrigin::initial ? "initial" : "retrieved_runtime";
}

std::string_view to_string(DocView view) {
  switch (view) {
    case DocView::full: return "full";
    case DocView::snippet: return "snippet";
    case DocView::summary: return "summary";
  }
  return "full";
}

DocView parse_doc_view(std::string_view name) {
  if (name == "full") return DocView::full;
  if (name == "snippet") return DocView::snippet;
  if (name == "summary") return DocView::summary;
  throw Error(ErrorKind::InvalidConfig, "unknown document view '" + std::string(name) + "'");
}

std::string_view Document::span_text(const SpanRef& span) const {
  if (span.range.end > text.size() || span.range.begin > span.range.end) return {};
  return std::string_view(text).substr(span.range.begin, span.range.size());
}

std::string_view Document::view_text(DocView view, bool* fell_back) const {
  if (fell_back != nullptr) *fell_back = false;
  if (view == DocView::snippet && snippet) return *snippet;
  if (view == DocView::summary && summary) return *summary;
  if (view != DocView::full && fell_back != nullptr) *fell_back = true;
  return text;
}

std::vector<int> Statement::cited_doc_ids() const {
  std::vector<int> ids;
  ids.reserve(citations.size());
  for (const auto& c : citations) ids.push_back(c.doc_id);
  return ids;
}

int DocStore::add(Document doc) {
  if (doc.doc_id != 0) {
    throw Error(ErrorKind::InvalidDocument,
                "document already carries id " + std::to_string(doc.doc_id));
  }
  if (docs_.size() >= capacity_) {
    throw Error(ErrorKind::CapacityExceeded,
                "store holds " + std::to_string(docs_.size()) + " documents");
  }
  if (doc.snippet) {
    auto range = locate_snippet(doc, *doc.snippet);
    if (!range) throw Error(ErrorKind::InvalidDocument, "snippet is not a substring of the text");
    doc.snippet_range = range;
  } else {
    doc.snippet_range.reset();
  }
  const int id = next_id_++;
  doc.doc_id = id;
  doc.spans = segment_spans(doc);
  docs_.emplace(id, std::move(doc));
  return id;
}

void DocStore::remove(int doc_id) { docs_.erase(doc_id); }

const Document& DocStore::get(int doc_id) const {
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) {
    throw Error(ErrorKind::UnknownDocId, "no document [" + std::to_string(doc_id) + "]");
  }
  return it->second;
}

const Document* DocStore::find(int doc_id) const {
  auto it = docs_.find(doc_id);
  return it == docs_.end() ? nullptr : &it->second;
}

std::vector<int> DocStore::ids() const {
  std::vector<int> out;
  out.reserve(docs_.size());
  for (const auto& [id, _] : docs_) out.push_back(id);
  return out;
}

std::vector<CharRange> split_sentences(std::string_view text) {
  std::vector<CharRange> raw_ranges;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = marker_run_end(text, i + 1);
    if (j == text.size() || text::is_space_byte(static_cast<unsigned char>(text[j]))) {
      raw_ranges.push_back({start, j});
      start = j;
      i = j;
    } else {
      ++i;
    }
  }
  if (start < text.size()) raw_ranges.push_back({start, text.size()});

  std::vector<CharRange> out;
  for (auto r : raw_ranges) {
    while (r.begin < r.end && text::is_space_byte(static_cast<unsigned char>(text[r.begin]))) {
      ++r.begin;
    }
    while (r.end > r.begin && text::is_space_byte(static_cast<unsigned char>(text[r.end - 1]))) {
      --r.end;
    }
    if (r.end > r.begin) out.push_back(r);
  }
  return out;
}

std::vector<Marker> find_markers(std::string_view text) {
  std::vector<Marker> out;
  std::size_t i = 0;
  while (i < text.size()) {
    int id = 0;
    std::size_t e = marker_end(text, i, &id);
    if (e == std::string_view::npos) {
      ++i;
      continue;
    }
    out.push_back({i, e, id});
    i = e;
  }
  return out;
}

std::string strip_citations(std::string_view text) {
  std::string current = strip_once(text);
  // Removing a marker can expose another ("[[1]2]" -> "[2]").
  while (!find_markers(current).empty()) current = strip_once(current);
  return current;
}

Answer parse_answer(std::string_view text) {
  Answer answer;
  answer.full_text = std::string(text);

  // Segments without any word content (bare markers, stray punctuation) bind
  // forward to the next sentence, or back to the last one at end of text.
  std::string pending;
  for (const auto& r : split_sentences(text)) {
    std::string raw(text.substr(r.begin, r.size()));
    if (!has_word(strip_citations(raw))) {
      pending = pending.empty() ? raw : pending + " " + raw;
      continue;
    }
    if (!pending.empty()) {
      raw = pending + " " + raw;
      pending.clear();
    }
    answer.statements.push_back(make_statement(std::move(raw)));
  }
  if (!pending.empty() && !answer.statements.empty()) {
    auto& last = answer.statements.back();
    last = make_statement(last.raw + " " + pending);
  }
  return answer;
}

std::vector<SpanRef> segment_spans(const Document& doc) {
  std::vector<SpanRef> spans;
  int idx = 0;
  for (const auto& r : split_sentences(doc.text)) spans.push_back({doc.doc_id, idx++, r});
  return spans;
}

std::optional<SpanRef> match_span(const Document& doc, std::string_view quote, double min_overlap) {
  auto quote_tokens = text::word_tokens(quote);
  if (quote_tokens.empty()) return std::nullopt;
  std::optional<SpanRef> best;
  double best_score = -1.0;
  const auto spans = doc.spans.empty() ? segment_spans(doc) : doc.spans;
  for (const auto& span : spans) {
    auto span_tokens = text::word_tokens(doc.span_text(span));
    double score = static_cast<double>(text::multiset_overlap(quote_tokens, span_tokens)) /
                   static_cast<double>(quote_tokens.size());
    if (score > best_score) {
      best_score = score;
      best = span;
    }
  }
  if (!best || best_score < min_overlap) return std::nullopt;
  return best;
}

Document make_document(std::string title, std::string text, std::optional<std::string> snippet,
                       std::optional<std::string> summary, DocOrigin origin) {
  Document doc;
  doc.title = std::move(title);
  doc.text = std::move(text);
  doc.summary = std::move(summary);
  doc.origin = origin;
  doc.spans = segment_spans(doc);

  if (snippet) {
    std::string trimmed(text::trim(*snippet));
    if (!trimmed.empty() && doc.text.find(trimmed) != std::string::npos) {
      doc.snippet = trimmed;
    } else {
      std::optional<CharRange> cover;
      for (const auto& r : split_sentences(trimmed)) {
        auto span = match_span(doc, std::string_view(trimmed).substr(r.begin, r.size()));
        if (!span) continue;
        if (!cover) {
          cover = span->range;
        } else {
          cover->begin = std::min(cover->begin, span->range.begin);
          cover->end = std::max(cover->end, span->range.end);
        }
      }
      if (cover) doc.snippet = doc.text.substr(cover->begin, cover->size());
    }
    if (doc.snippet) doc.snippet_range = locate_snippet(doc, *doc.snippet);
  }
  return doc;
}

std::vector<SpanRef> expand_citation(const Citation& citation, const DocStore& store) {
  if (citation.level == CitationLevel::span) return citation.span_refs;
  const Document* doc = store.find(citation.doc_id);
  if (doc == nullptr) return {};
  return doc->spans;
}

std::string spans_text(const std::vector<SpanRef>& spans, const DocStore& store) {
  std::string out;
  for (const auto& span : spans) {
    const Document* doc = store.find(span.doc_id);
    if (doc == nullptr) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(doc->span_text(span));
  }
  return out;
}

std::string cited_text(const std::vector<Citation>& citations, const DocStore& store) {
  std::string out;
  for (const auto& c : citations) {
    std::string part;
    if (c.level == CitationLevel::document) {
      const Document* doc = store.find(c.doc_id);
      if (doc == nullptr) continue;
      part = doc->text;
    } else {
      part = spans_text(c.span_refs, store);
    }
    if (part.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += part;
  }
  return out;
}

std::string render_statement(const Statement& statement) {
  std::string body = statement.text;
  if (statement.citations.empty()) return body;
  std::size_t cut = body.size();
  while (cut > 0 && is_terminator(body[cut - 1])) --cut;
  std::string markers;
  for (const auto& c : statement.citations) markers += "[" + std::to_string(c.doc_id) + "]";
  std::string head = body.substr(0, cut);
  std::string tail = body.substr(cut);
  return head.empty() ? markers + tail : head + " " + markers + tail;
}

std::string render_answer(const Answer& answer) {
  std::string out;
  for (const auto& st : answer.statements) {
    if (!out.empty()) out.push_back(' ');
    out += st.raw;
  }
  return out;
}

void scope_citations(Answer& answer, const DocStore& store, DocView view) {
  if (view == DocView::full) return;
  for (auto& st : answer.statements) {
    for (auto& c : st.citations) {
      if (c.level != CitationLevel::document) continue;
      const Document* doc = store.find(c.doc_id);
      if (doc == nullptr) continue;
      std::vector<SpanRef> spans;
      if (view == DocView::snippet && doc->snippet_range) {
        for (const auto& span : doc->spans) {
          if (span.range.overlaps(*doc->snippet_range)) spans.push_back(span);
        }
      } else if (view == DocView::summary && doc->summary) {
        std::set<int> chosen;
        const std::string& summary = *doc->summary;
        for (const auto& r : split_sentences(summary)) {
          auto span = match_span(*doc, std::string_view(summary).substr(r.begin, r.size()));
          if (span) chosen.insert(span->span_idx);
        }
        for (int idx : chosen) spans.push_back(doc->spans.at(static_cast<std::size_t>(idx)));
      }
      if (!spans.empty()) c = Citation::of_spans(c.doc_id, std::move(spans));
    }
  }
}

}  // namespace citekit
