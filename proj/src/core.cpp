#include "crowdcorrect/core.hpp"

#include <cctype>

namespace crowdcorrect {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJson: return "MALFORMED_JSON";
    case ErrorCode::MissingField: return "MISSING_FIELD";
    case ErrorCode::EmptyText: return "EMPTY_TEXT";
    case ErrorCode::InvalidField: return "INVALID_FIELD";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::OverlappingSpans: return "OVERLAPPING_SPANS";
    case ErrorCode::PreconditionFailed: return "PRECONDITION_FAILED";
    case ErrorCode::DuplicateAnswer: return "DUPLICATE_ANSWER";
    case ErrorCode::UnknownTask: return "UNKNOWN_TASK";
    case ErrorCode::UnknownWorker: return "UNKNOWN_WORKER";
    case ErrorCode::TaskClosed: return "TASK_CLOSED";
    case ErrorCode::InvalidChoice: return "INVALID_CHOICE";
    case ErrorCode::CorruptLog: return "CORRUPT_LOG";
    case ErrorCode::EmptyVocabulary: return "EMPTY_VOCABULARY";
    case ErrorCode::DivergenceDetected: return "DIVERGENCE_DETECTED";
    case ErrorCode::NetworkError: return "NETWORK_ERROR";
    case ErrorCode::BadResponse: return "BAD_RESPONSE";
    case ErrorCode::PortInUse: return "PORT_IN_USE";
    case ErrorCode::StoreLocked: return "STORE_LOCKED";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

std::string_view to_string(IssueClass issue) {
  switch (issue) {
    case IssueClass::misspelling: return "misspelling";
    case IssueClass::abbreviation: return "abbreviation";
    case IssueClass::jargon: return "jargon";
    case IssueClass::none: return "none";
  }
  return "none";
}

std::optional<IssueClass> parse_issue_class(std::string_view text) {
  const std::string folded = casefold(trim(text));
  if (folded == "misspelling") return IssueClass::misspelling;
  if (folded == "abbreviation") return IssueClass::abbreviation;
  if (folded == "jargon") return IssueClass::jargon;
  if (folded == "none") return IssueClass::none;
  return std::nullopt;
}

std::string casefold(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view text) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

bool starts_with_upper(std::string_view text) {
  return !text.empty() && text.front() >= 'A' && text.front() <= 'Z';
}

std::string capitalize_first(std::string_view text) {
  std::string out(text);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

std::string lowercase_first(std::string_view text) {
  std::string out(text);
  if (!out.empty() && out[0] >= 'A' && out[0] <= 'Z') {
    out[0] = static_cast<char>(out[0] - 'A' + 'a');
  }
  return out;
}

std::string_view strip_trailing_period(std::string_view text) {
  if (!text.empty() && text.back() == '.') text.remove_suffix(1);
  return text;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size() * 3);
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0F]);
    }
  }
  return out;
}

}  // namespace crowdcorrect
