#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace citekit {

enum class ErrorKind {
  // datasets
  FileUnreadable,
  FileUnwritable,
  MalformedDataset,
  MalformedRecord,
  EmptyDataset,
  MissingField,
  // core model
  CapacityExceeded,
  InvalidDocument,
  // llm backends
  InvalidTemplate,
  InvalidParams,
  UnboundPlaceholder,
  UnknownDocId,
  BackendUnavailable,
  BackendRefusal,
  // pipeline
  DuplicateNodeId,
  UnknownNode,
  InvalidGraph,
  StepBudgetExhausted,
  NodeFailure,
  // enhancers
  EmptyCorpus,
  RetrievalRefused,
  EmptyPlan,
  UnparseablePlan,
  // evaluator
  JudgeUnavailable,
  UnknownMetric,
  // recipes / cli
  UnknownRecipe,
  InvalidOverride,
  SchemaViolation,
  AlignmentError,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers can branch
/// without string matching.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message, bool retryable = false)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message),
        retryable_(retryable) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }
  bool retryable() const noexcept { return retryable_; }

private:
  ErrorKind kind_;
  std::string detail_;
  bool retryable_;
};

class MalformedRecordError : public Error {
public:
  MalformedRecordError(std::size_t index, std::string field)
      : Error(ErrorKind::MalformedRecord,
              "record " + std::to_string(index) + ": missing or invalid field '" + field + "'"),
        index_(index),
        field_(std::move(field)) {}

  std::size_t index() const noexcept { return index_; }
  const std::string& field() const noexcept { return field_; }

private:
  std::size_t index_;
  std::string field_;
};

class NodeFailureError : public Error {
public:
  NodeFailureError(std::string node_id, const std::string& cause, ErrorKind cause_kind)
      : Error(ErrorKind::NodeFailure, "node '" + node_id + "' failed: " + cause),
        node_id_(std::move(node_id)),
        cause_kind_(cause_kind) {}

  const std::string& node_id() const noexcept { return node_id_; }
  ErrorKind cause_kind() const noexcept { return cause_kind_; }

private:
  std::string node_id_;
  ErrorKind cause_kind_;
};

}  // namespace citekit
