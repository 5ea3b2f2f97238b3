#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "crowdcorrect/core.hpp"
#include "crowdcorrect/ingest.hpp"

namespace crowdcorrect {

enum class TokenKind { word, hashtag, mention, url, number, punctuation };

std::string_view to_string(TokenKind kind);

/// A slice of the source text; `surface` always equals text[start, end).
struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  TokenKind kind = TokenKind::word;

  bool operator==(const Token&) const = default;
};

/// Splits text into tokens covering every non-whitespace run.
///
/// Leading and trailing punctuation is split into one token per code point.
/// The exception is a single trailing '.' on an alphabetic word of at most
/// six code points, which stays attached ("Hosp.", "Aus.") so abbreviation
/// lookup can see it. Runs starting with '#' or '@' followed by a word
/// character are hashtags and mentions. URL-shaped runs (scheme, "www." or
/// domain/path) are kept whole apart from trailing sentence punctuation.
std::vector<Token> tokenize(std::string_view text);

enum class FeatureKind {
  keyword,
  hashtag,
  mention,
  url,
  named_entity,
  time,
  location
};

enum class FeatureStatus {
  untouched,
  clean,
  auto_corrected,
  needs_crowd,
  crowd_corrected,
  unresolved
};

enum class CorrectionMethod { automatic, crowd };

std::string_view to_string(FeatureKind kind);
std::string_view to_string(FeatureStatus status);
std::string_view to_string(CorrectionMethod method);  // "auto" | "crowd"
std::optional<FeatureKind> parse_feature_kind(std::string_view text);
std::optional<FeatureStatus> parse_feature_status(std::string_view text);
std::optional<CorrectionMethod> parse_correction_method(std::string_view text);

struct Provenance {
  CorrectionMethod method = CorrectionMethod::automatic;
  std::string source_id;
  double score = 0.0;

  bool operator==(const Provenance&) const = default;
};

/// One extracted feature occurrence with its curation state.
///
/// `span` is absent only for location records taken from the post's geo
/// field, which has no position in the text. Hashtag records keep the
/// span of the whole token while `surface` drops the '#'.
struct FeatureRecord {
  std::string feature_id;
  std::string post_id;
  FeatureKind kind = FeatureKind::keyword;
  std::string surface;
  std::optional<Span> span;
  FeatureStatus status = FeatureStatus::untouched;
  std::optional<IssueClass> issue_class;
  std::optional<std::string> correction;
  std::optional<Provenance> provenance;
  // Candidates cached by the automated pass for crowd task generation.
  std::vector<Candidate> candidates;
  // Issue class already settled upstream; the crowd only picks a correction.
  bool correction_only = false;

  bool operator==(const FeatureRecord&) const = default;
};

/// `<post_id>:<start>-<end>` for keywords, with a `/<kind>` suffix for the
/// other kinds so records sharing a span keep distinct ids.
std::string make_feature_id(std::string_view post_id, FeatureKind kind,
                            std::optional<Span> span);

using WordSet = std::unordered_set<std::string>;

/// Bundled English stopword list, case-folded.
const WordSet& default_stopwords();

/// One entry per line; blank lines and lines starting with '#' are skipped.
/// Entries are case-folded.
WordSet load_word_set(const std::filesystem::path& path);

/// Case-folded lookup key for stopword comparison: one trailing '.' is
/// dropped and typographic apostrophes become '\''.
std::string stopword_key(std::string_view surface);

/// Keyword records for non-stopword words and every hashtag body, plus
/// hashtag, mention and url records. All records start untouched.
std::vector<FeatureRecord> extract_features(const RawPost& post,
                                            const WordSet& stopwords);

/// Heuristic named entities: capitalised words that do not start a
/// sentence, and any word found in the gazetteer (case-folded).
std::vector<FeatureRecord> extract_entities(std::string_view post_id,
                                            const std::vector<Token>& tokens,
                                            const WordSet& gazetteer);

/// Date-shaped token runs ("14 June 19", "June 14, 2019", ISO dates,
/// d/m/y, weekday names) become time records; `post.geo` becomes one
/// location record.
std::vector<FeatureRecord> extract_time_location(
    const std::vector<Token>& tokens, const RawPost& post);

struct ExtractOptions {
  WordSet stopwords = default_stopwords();
  WordSet gazetteer;
};

/// All extractors over one post, ordered by (span start, kind).
std::vector<FeatureRecord> extract_all(const RawPost& post,
                                       const ExtractOptions& options);

}  // namespace crowdcorrect
