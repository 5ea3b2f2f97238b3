#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crowdcorrect {

enum class ErrorCode {
  MalformedJson,
  MissingField,
  EmptyText,
  InvalidField,
  IoError,
  OverlappingSpans,
  PreconditionFailed,
  DuplicateAnswer,
  UnknownTask,
  UnknownWorker,
  TaskClosed,
  InvalidChoice,
  CorruptLog,
  EmptyVocabulary,
  DivergenceDetected,
  NetworkError,
  BadResponse,
  PortInUse,
  StoreLocked,
  InvalidArgument,
};

/// Upper snake case name used on the wire, e.g. "DUPLICATE_ANSWER".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by event-log replay; carries the 1-based line that failed to parse.
class CorruptLogError : public Error {
 public:
  CorruptLogError(std::size_t line, const std::string& message)
      : Error(ErrorCode::CorruptLog,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class IssueClass { misspelling, abbreviation, jargon, none };

std::string_view to_string(IssueClass issue);
std::optional<IssueClass> parse_issue_class(std::string_view text);

/// A scored replacement suggestion from a knowledge source.
struct Candidate {
  std::string replacement;
  double score = 0.0;
  std::string source_id;

  bool operator==(const Candidate&) const = default;
};

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

// Text helpers shared by the pipeline stages. Case folding is ASCII only;
// non-ASCII bytes pass through unchanged.
std::string casefold(std::string_view text);
std::string_view trim(std::string_view text);
bool starts_with_upper(std::string_view text);
std::string capitalize_first(std::string_view text);
std::string lowercase_first(std::string_view text);

/// Strips exactly one trailing '.', if present.
std::string_view strip_trailing_period(std::string_view text);

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data);

/// Percent-encodes everything outside the RFC 3986 unreserved set.
std::string url_encode(std::string_view text);

}  // namespace crowdcorrect
