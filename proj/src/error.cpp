#include "labelerr/error.hpp"

namespace labelerr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::FoldTooSmall: return "FoldTooSmall";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::RowSumOutOfTolerance: return "RowSumOutOfTolerance";
    case ErrorKind::UnknownExampleId: return "UnknownExampleId";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::WrongJudgmentCount: return "WrongJudgmentCount";
    case ErrorKind::EmptySubset: return "EmptySubset";
    case ErrorKind::EmptyPruned: return "EmptyPruned";
    case ErrorKind::EmptyCandidateList: return "EmptyCandidateList";
    case ErrorKind::InvalidPolicy: return "InvalidPolicy";
    case ErrorKind::UnknownSession: return "UnknownSession";
    case ErrorKind::UnknownWorker: return "UnknownWorker";
    case ErrorKind::UnknownCandidate: return "UnknownCandidate";
    case ErrorKind::NotAssigned: return "NotAssigned";
    case ErrorKind::DuplicateJudgment: return "DuplicateJudgment";
    case ErrorKind::MalformedChoice: return "MalformedChoice";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace labelerr
