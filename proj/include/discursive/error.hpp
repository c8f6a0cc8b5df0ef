#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace discursive {

enum class ErrorCode {
  // corpus
  NoTurnsFound,
  UnterminatedHeader,
  AgendaMismatch,
  MalformedHeader,
  DateOutsideWindow,
  NoProtocols,
  // textprep
  EmptyVocabulary,
  // topicmodel
  InvalidConfig,
  EmptyMatrix,
  TopicOutOfRange,
  ModelMatrixMismatch,
  // modelselect
  DimensionMismatch,
  NotADistribution,
  SingleTopic,
  EmptyScan,
  ScanFailed,
  // netgraph
  NodeNotInView,
  EmptyGraph,
  PartitionIncomplete,
  UnsupportedFormat,
  // shared
  InvalidArgument,
  ParseError,
  IoFailure,
  BundleInvalid,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can translate it into a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Process exit status for a given error. Codes are grouped by module.
int exit_code_for(ErrorCode code);

}  // namespace discursive
