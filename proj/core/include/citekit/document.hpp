#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citekit {

enum class DocOrigin { initial, retrieved_runtime };

/// Which view of a document fills a prompt, and how citations to it are scoped.
enum class DocView { full, snippet, summary };

std::string_view to_string(DocOrigin origin);
std::string_view to_string(DocView view);
DocView parse_doc_view(std::string_view name);

/// Half-open byte offsets into a document's text.
struct CharRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool overlaps(const CharRange& other) const noexcept {
    return begin < other.end && other.begin < end;
  }
  friend bool operator==(const CharRange&, const CharRange&) = default;
};

struct SpanRef {
  int doc_id = 0;
  int span_idx = 0;
  CharRange range;

  friend bool operator==(const SpanRef&, const SpanRef&) = default;
};

struct Document {
  int doc_id = 0;  // 0 until a DocStore assigns one
  std::string title;
  std::string text;
  std::vector<SpanRef> spans;
  std::optional<std::string> snippet;
  std::optional<std::string> summary;
  DocOrigin origin = DocOrigin::initial;

  /// Location of `snippet` inside `text`; set whenever snippet is present.
  std::optional<CharRange> snippet_range;

  std::string_view span_text(const SpanRef& span) const;
  /// Text for the requested view, falling back to the full text when the
  /// view is absent. `fell_back` reports the fallback.
  std::string_view view_text(DocView view, bool* fell_back = nullptr) const;
};

enum class CitationLevel { document, span };

struct Citation {
  int doc_id = 0;
  CitationLevel level = CitationLevel::document;
  std::vector<SpanRef> span_refs;  // empty iff level == document

  static Citation whole(int doc_id) { return {doc_id, CitationLevel::document, {}}; }
  static Citation of_spans(int doc_id, std::vector<SpanRef> spans) {
    return {doc_id, CitationLevel::span, std::move(spans)};
  }
  friend bool operator==(const Citation&, const Citation&) = default;
};

struct Statement {
  std::string text;  // raw with citation markers removed
  std::string raw;
  std::vector<Citation> citations;

  bool has_citation() const noexcept { return !citations.empty(); }
  std::vector<int> cited_doc_ids() const;
};

struct Answer {
  std::vector<Statement> statements;
  std::string full_text;
};

/// Arrival-ordered document store for one pipeline run. Ids are never reused,
/// even after removal. Mutation needs external serialization.
class DocStore {
public:
  static constexpr std::size_t kDefaultCapacity = 1u << 20;

  explicit DocStore(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {}

  /// Assigns the next id, segments spans and validates the snippet view.
  int add(Document doc);
  void remove(int doc_id);

  bool contains(int doc_id) const { return docs_.count(doc_id) != 0; }
  const Document& get(int doc_id) const;  // throws UnknownDocId
  const Document* find(int doc_id) const;

  std::vector<int> ids() const;
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }
  int next_id() const noexcept { return next_id_; }

  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }

private:
  std::map<int, Document> docs_;
  int next_id_ = 1;
  std::size_t capacity_;
};

/// Sentence boundaries: a terminator (. ! ?), optionally followed by citation
/// markers, then whitespace or end of text. Ranges are trimmed; empty ones are
/// dropped.
std::vector<CharRange> split_sentences(std::string_view text);

/// Positions of "[k]" markers (k = 1..9 digits).
struct Marker {
  std::size_t begin;
  std::size_t end;
  int doc_id;
};
std::vector<Marker> find_markers(std::string_view text);

Answer parse_answer(std::string_view text);
std::string strip_citations(std::string_view text);
std::vector<SpanRef> segment_spans(const Document& doc);

/// Builds a document with spans segmented and the snippet located inside the
/// text. A snippet that is not a verbatim substring is replaced by the run of
/// sentences it best matches, or dropped when nothing matches.
Document make_document(std::string title, std::string text,
                       std::optional<std::string> snippet = std::nullopt,
                       std::optional<std::string> summary = std::nullopt,
                       DocOrigin origin = DocOrigin::initial);

/// Spans denoted by a citation (document level → every span of the document).
std::vector<SpanRef> expand_citation(const Citation& citation, const DocStore& store);

/// Concatenated source text for a set of citations, in citation order.
std::string cited_text(const std::vector<Citation>& citations, const DocStore& store);
std::string spans_text(const std::vector<SpanRef>& spans, const DocStore& store);

/// Re-renders a statement's raw text from its text and citations.
std::string render_statement(const Statement& statement);
std::string render_answer(const Answer& answer);

/// Best span of `doc` for `quote` by word-token coverage of the quote.
std::optional<SpanRef> match_span(const Document& doc, std::string_view quote,
                                  double min_overlap = 0.5);

/// Narrows document-level citations to the spans behind a snippet or summary view.
void scope_citations(Answer& answer, const DocStore& store, DocView view);

}  // namespace citekit
