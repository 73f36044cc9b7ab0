#include "revlang/errors.hpp"

namespace revlang {

std::string SourceSpan::str() const {
  std::string out = file ? *file : std::string("<input>");
  out += ':' + std::to_string(line) + ':' + std::to_string(column);
  if (end_line != line || end_column != column) {
    out += '-' + std::to_string(end_line) + ':' + std::to_string(end_column);
  }
  return out;
}

std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::PostconditionMismatch: return "PostconditionMismatch";
    case ErrorKind::DirtyAncilla: return "DirtyAncilla";
    case ErrorKind::LoopIteratorMutated: return "LoopIteratorMutated";
    case ErrorKind::AliasedArguments: return "AliasedArguments";
    case ErrorKind::AssertFailed: return "AssertFailed";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::FuelExhausted: return "FuelExhausted";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::IndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorKind::NoSuchField: return "NoSuchField";
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::OverflowError: return "OverflowError";
    case ErrorKind::MissingAdjoint: return "MissingAdjoint";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::DuplicateAncilla: return "DuplicateAncilla";
    case ErrorKind::UnbalancedAncilla: return "UnbalancedAncilla";
    case ErrorKind::UnmatchedRoutine: return "UnmatchedRoutine";
    case ErrorKind::UnknownExample: return "UnknownExample";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorKind kind, const std::string& message, const SourceSpan& span) {
  std::string out(error_name(kind));
  if (span.line > 0) out += " at " + span.str();
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

RevError::RevError(ErrorKind kind, std::string message, SourceSpan span)
    : std::runtime_error(format_message(kind, message, span)),
      kind_(kind),
      detail_(std::move(message)),
      span_(std::move(span)) {}

RevError RevError::with_span(const SourceSpan& span) const {
  if (span_.line > 0 || span.line == 0) return *this;
  return RevError(kind_, detail_, span);
}

SyntaxError::SyntaxError(std::string message, SourceSpan span)
    : std::runtime_error("SyntaxError at " + span.str() + ": " + message),
      detail_(std::move(message)),
      span_(std::move(span)) {}

}  // namespace revlang
