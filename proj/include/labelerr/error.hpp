#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace labelerr {

enum class ErrorKind {
  EmptyClass,
  DimensionMismatch,
  InvalidArgument,
  FoldTooSmall,
  NonFinite,
  RowSumOutOfTolerance,
  UnknownExampleId,
  NegativeEntry,
  WrongJudgmentCount,
  EmptySubset,
  EmptyPruned,
  EmptyCandidateList,
  InvalidPolicy,
  UnknownSession,
  UnknownWorker,
  UnknownCandidate,
  NotAssigned,
  DuplicateJudgment,
  MalformedChoice,
  Parse,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library surfaces as this exception; `kind()` is the
// stable discriminator callers (CLI exit codes, HTTP status) switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace labelerr
