#include "citekit/dataset.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citekit/error.hpp"
#include "citekit/text.hpp"

namespace citekit {

using json = nlohmann::json;

namespace {

std::string source_key(const FieldMap& map, const std::string& canonical) {
  auto it = map.find(canonical);
  return it == map.end() ? canonical : it->second;
}

std::optional<std::string> optional_string(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

bool looks_like_doc_list(const json& value, const std::string& title_key,
                         const std::string& text_key) {
  if (!value.is_array() || value.empty()) return false;
  const auto& first = value.front();
  return first.is_object() && first.contains(title_key) && first.contains(text_key);
}

std::vector<RawDoc> parse_docs(const json& value, std::size_t index, const std::string& field,
                               const FieldMap& map) {
  if (!value.is_array()) throw MalformedRecordError(index, field);
  const std::string title_key = source_key(map, "title");
  const std::string text_key = source_key(map, "text");
  const std::string extraction_key = source_key(map, "extraction");
  const std::string summary_key = source_key(map, "summary");

  std::vector<RawDoc> docs;
  docs.reserve(value.size());
  for (std::size_t d = 0; d < value.size(); ++d) {
    const auto& entry = value[d];
    const std::string where = field + "[" + std::to_string(d) + "]";
    if (!entry.is_object()) throw MalformedRecordError(index, where);
    auto title = entry.find(title_key);
    auto text = entry.find(text_key);
    if (title == entry.end() || !title->is_string()) {
      throw MalformedRecordError(index, where + "." + title_key);
    }
    if (text == entry.end() || !text->is_string()) {
      throw MalformedRecordError(index, where + "." + text_key);
    }
    docs.push_back({title->get<std::string>(), text->get<std::string>(),
                    optional_string(entry, extraction_key), optional_string(entry, summary_key)});
  }
  return docs;
}

DatasetRecord parse_record(const json& obj, std::size_t index, const FieldMap& map) {
  if (!obj.is_object()) throw MalformedRecordError(index, "<record>");
  DatasetRecord rec;

  const std::string q_key = source_key(map, "question");
  auto q = obj.find(q_key);
  if (q == obj.end() || !q->is_string() || text::trim(q->get<std::string>()).empty()) {
    throw MalformedRecordError(index, q_key);
  }
  rec.question = q->get<std::string>();
  rec.gold_answer = optional_string(obj, source_key(map, "answer"));

  const std::string title_key = source_key(map, "title");
  const std::string text_key = source_key(map, "text");
  const std::string docs_key = source_key(map, "docs");
  if (auto it = obj.find(docs_key); it != obj.end() && !it->is_null()) {
    rec.doc_lists["docs"] = parse_docs(*it, index, docs_key, map);
  }
  // Other document lists stay reachable under their source key.
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it.key() == docs_key) continue;
    if (looks_like_doc_list(it.value(), title_key, text_key)) {
      rec.doc_lists[it.key()] = parse_docs(it.value(), index, it.key(), map);
    }
  }

  const std::string qa_key = source_key(map, "qa_pairs");
  const std::string sub_key = source_key(map, "sub_question");
  const std::string short_key = source_key(map, "short_answers");
  if (auto it = obj.find(qa_key); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw MalformedRecordError(index, qa_key);
    for (std::size_t p = 0; p < it->size(); ++p) {
      const auto& pair = (*it)[p];
      const std::string where = qa_key + "[" + std::to_string(p) + "]";
      if (!pair.is_object()) throw MalformedRecordError(index, where);
      QaPair qa;
      // ASQA stores the sub-question under "question"; accept either key.
      if (auto s = optional_string(pair, sub_key)) {
        qa.sub_question = *s;
      } else if (auto s2 = optional_string(pair, "question")) {
        qa.sub_question = *s2;
      }
      auto answers = pair.find(short_key);
      if (answers == pair.end() || !answers->is_array()) {
        throw MalformedRecordError(index, where + "." + short_key);
      }
      for (const auto& a : *answers) {
        if (a.is_string() && !text::trim(a.get<std::string>()).empty()) {
          qa.short_answers.push_back(a.get<std::string>());
        }
      }
      if (qa.short_answers.empty()) throw MalformedRecordError(index, where + "." + short_key);
      rec.qa_pairs.push_back(std::move(qa));
    }
  }
  return rec;
}

}  // namespace

const std::vector<RawDoc>* DatasetRecord::docs(const std::string& key) const {
  auto it = doc_lists.find(key);
  return it == doc_lists.end() ? nullptr : &it->second;
}

FieldMap parse_field_map(std::string_view spec) {
  FieldMap map;
  std::string item;
  std::stringstream ss{std::string(spec)};
  while (std::getline(ss, item, ',')) {
    auto trimmed = std::string(text::trim(item));
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == trimmed.size()) {
      throw Error(ErrorKind::InvalidConfig, "field map entry '" + trimmed + "' is not k=v");
    }
    map[std::string(text::trim(trimmed.substr(0, eq)))] =
        std::string(text::trim(trimmed.substr(eq + 1)));
  }
  return map;
}

Dataset parse_dataset(std::string_view json_text, std::string name, const FieldMap& field_map) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedDataset, name + ": " + e.what());
  }
  if (!root.is_array()) {
    throw Error(ErrorKind::MalformedDataset, name + ": top level must be an array of records");
  }
  if (root.empty()) throw Error(ErrorKind::EmptyDataset, name + " has no records");

  Dataset ds;
  ds.name = std::move(name);
  ds.records.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    ds.records.push_back(parse_record(root[i], i, field_map));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const FieldMap& field_map) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileUnreadable, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::FileUnreadable, "cannot read " + path.string());
  return parse_dataset(buf.str(), path.filename().string(), field_map);
}

Document to_document(const RawDoc& raw, DocOrigin origin) {
  return make_document(raw.title, raw.text, raw.extraction, raw.summary, origin);
}

BoundRecord bind_record(const DatasetRecord& record, const std::string& init_docs_key,
                        std::size_t top_n) {
  const auto* docs = record.docs(init_docs_key);
  if (docs == nullptr) {
    throw Error(ErrorKind::MissingField, "record has no document list '" + init_docs_key + "'");
  }
  BoundRecord bound{record.question, DocStore{}};
  const std::size_t n = std::min(top_n, docs->size());
  for (std::size_t i = 0; i < n; ++i) bound.store.add(to_document((*docs)[i]));
  return bound;
}

}  // namespace citekit
