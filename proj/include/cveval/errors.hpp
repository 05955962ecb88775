#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cveval {

// Every library error derives from Error. The kind steers the CLI exit code:
// malformed input maps to 2, statistical degeneracy (constant metric, no
// judgments, zero variance, ...) maps to 3.
enum class ErrorKind { input, degenerate };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define CVEVAL_ERROR(NAME, KIND)                    \
  struct NAME : Error {                             \
    explicit NAME(const std::string& msg)           \
        : Error(ErrorKind::KIND, msg) {}            \
  }

// estimator
CVEVAL_ERROR(EmptyPopulation, input);
CVEVAL_ERROR(DegenerateMetric, degenerate);
CVEVAL_ERROR(EmptySample, input);
CVEVAL_ERROR(LengthMismatch, input);
CVEVAL_ERROR(ZeroN, input);
CVEVAL_ERROR(RhoOutOfRange, input);
CVEVAL_ERROR(NegativeGamma, input);
CVEVAL_ERROR(NonpositiveTarget, input);

// variance components
CVEVAL_ERROR(NoReplicatedItems, degenerate);
CVEVAL_ERROR(TooFewItems, input);
CVEVAL_ERROR(DegenerateF, degenerate);
CVEVAL_ERROR(DegenerateInput, degenerate);

// text metrics
CVEVAL_ERROR(NoReferences, input);
CVEVAL_ERROR(DimensionMismatch, input);

// bootstrap
CVEVAL_ERROR(GridExceedsData, input);
CVEVAL_ERROR(ZeroWidth, degenerate);

// synthetic worlds
CVEVAL_ERROR(NotPSD, input);
CVEVAL_ERROR(TooFewReplicates, input);
CVEVAL_ERROR(TooFewPoints, input);
CVEVAL_ERROR(MalformedAssignment, input);

// linear algebra
CVEVAL_ERROR(RowCountMismatch, input);
CVEVAL_ERROR(SingularShift, input);
CVEVAL_ERROR(SingularInner, input);
CVEVAL_ERROR(NonIdentityU, input);
CVEVAL_ERROR(SingularD, input);
CVEVAL_ERROR(NotSPD, input);
CVEVAL_ERROR(DimensionCap, input);

// dataset / CLI
CVEVAL_ERROR(DuplicateKey, input);
CVEVAL_ERROR(MissingField, input);
CVEVAL_ERROR(NoJudgments, degenerate);

#undef CVEVAL_ERROR

// Parse failures carry the 1-based line number of the offending record.
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& msg)
      : Error(ErrorKind::input,
              "line " + std::to_string(line) + ": " + msg),
        line(line) {}
  std::size_t line;
};

}  // namespace cveval
