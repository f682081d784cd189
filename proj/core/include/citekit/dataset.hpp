#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "citekit/document.hpp"

namespace citekit {

struct RawDoc {
  std::string title;
  std::string text;
  std::optional<std::string> extraction;
  std::optional<std::string> summary;

  friend bool operator==(const RawDoc&, const RawDoc&) = default;
};

struct QaPair {
  std::string sub_question;
  std::vector<std::string> short_answers;

  friend bool operator==(const QaPair&, const QaPair&) = default;
};

struct DatasetRecord {
  std::string question;
  std::optional<std::string> gold_answer;
  /// Every list-of-documents field in the source record, keyed by canonical
  /// name ("docs" unless remapped).
  std::map<std::string, std::vector<RawDoc>> doc_lists;
  std::vector<QaPair> qa_pairs;

  const std::vector<RawDoc>* docs(const std::string& key = "docs") const;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct Dataset {
  std::string name;
  std::vector<DatasetRecord> records;

  std::size_t size() const noexcept { return records.size(); }
};

/// Canonical field name -> key used in the source file. Canonical record
/// fields: question, answer, docs, qa_pairs. Document fields: title, text,
/// extraction, summary. QA fields: sub_question, short_answers.
using FieldMap = std::map<std::string, std::string>;

/// Parses "k=v,k2=v2".
FieldMap parse_field_map(std::string_view spec);

Dataset load_dataset(const std::filesystem::path& path, const FieldMap& field_map = {});
Dataset parse_dataset(std::string_view json_text, std::string name, const FieldMap& field_map = {});

inline constexpr std::size_t kDefaultTopDocs = 5;

struct BoundRecord {
  std::string query;
  DocStore store;
};

/// Loads the first `top_n` documents of `init_docs_key` into a fresh store,
/// ids 1..n in list order. The record is not modified.
BoundRecord bind_record(const DatasetRecord& record, const std::string& init_docs_key = "docs",
                        std::size_t top_n = kDefaultTopDocs);

Document to_document(const RawDoc& raw, DocOrigin origin = DocOrigin::initial);

}  // namespace citekit
