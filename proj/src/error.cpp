#include "discursive/error.hpp"

namespace discursive {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoTurnsFound: return "NoTurnsFound";
    case ErrorCode::UnterminatedHeader: return "UnterminatedHeader";
    case ErrorCode::AgendaMismatch: return "AgendaMismatch";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::DateOutsideWindow: return "DateOutsideWindow";
    case ErrorCode::NoProtocols: return "NoProtocols";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::TopicOutOfRange: return "TopicOutOfRange";
    case ErrorCode::ModelMatrixMismatch: return "ModelMatrixMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotADistribution: return "NotADistribution";
    case ErrorCode::SingleTopic: return "SingleTopic";
    case ErrorCode::EmptyScan: return "EmptyScan";
    case ErrorCode::ScanFailed: return "ScanFailed";
    case ErrorCode::NodeNotInView: return "NodeNotInView";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::PartitionIncomplete: return "PartitionIncomplete";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BundleInvalid: return "BundleInvalid";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoTurnsFound:
    case ErrorCode::UnterminatedHeader:
    case ErrorCode::AgendaMismatch:
    case ErrorCode::MalformedHeader:
    case ErrorCode::DateOutsideWindow:
    case ErrorCode::NoProtocols:
      return 10;
    case ErrorCode::EmptyVocabulary:
      return 11;
    case ErrorCode::InvalidConfig:
    case ErrorCode::EmptyMatrix:
    case ErrorCode::TopicOutOfRange:
    case ErrorCode::ModelMatrixMismatch:
      return 12;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotADistribution:
    case ErrorCode::SingleTopic:
    case ErrorCode::EmptyScan:
    case ErrorCode::ScanFailed:
      return 13;
    case ErrorCode::NodeNotInView:
    case ErrorCode::EmptyGraph:
    case ErrorCode::PartitionIncomplete:
    case ErrorCode::UnsupportedFormat:
      return 14;
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::ParseError:
      return 4;
    case ErrorCode::IoFailure:
      return 3;
    case ErrorCode::BundleInvalid:
      return 15;
  }
  return 1;
}

}  // namespace discursive
