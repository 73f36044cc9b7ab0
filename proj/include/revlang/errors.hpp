#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace revlang {

/// Location of a construct in `.rnl` source. Spans never take part in
/// structural equality, so every comparison returns true.
struct SourceSpan {
  std::shared_ptr<const std::string> file;
  int line = 0;
  int column = 0;
  int end_line = 0;
  int end_column = 0;

  bool operator==(const SourceSpan&) const { return true; }

  std::string str() const;
};

enum class ErrorKind {
  PostconditionMismatch,
  DirtyAncilla,
  LoopIteratorMutated,
  AliasedArguments,
  AssertFailed,
  DomainError,
  FuelExhausted,
  UnboundVariable,
  IndexOutOfBounds,
  NoSuchField,
  TypeError,
  OverflowError,
  MissingAdjoint,
  UnknownFunction,
  ArityMismatch,
  DuplicateAncilla,
  UnbalancedAncilla,
  UnmatchedRoutine,
  UnknownExample,
  InvalidArgument,
};

std::string_view error_name(ErrorKind kind);

/// Runtime failure raised by the interpreter, the instruction set or the
/// differentiation engine.
class RevError : public std::runtime_error {
 public:
  RevError(ErrorKind kind, std::string message, SourceSpan span = {});

  ErrorKind kind() const noexcept { return kind_; }
  const SourceSpan& span() const noexcept { return span_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Attach a span if none has been recorded yet.
  RevError with_span(const SourceSpan& span) const;

 private:
  ErrorKind kind_;
  std::string detail_;
  SourceSpan span_;
};

/// Malformed `.rnl` text.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::string message, SourceSpan span);
  const SourceSpan& span() const noexcept { return span_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  SourceSpan span_;
};

}  // namespace revlang
