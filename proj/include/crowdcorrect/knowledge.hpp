#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crowdcorrect/core.hpp"

namespace crowdcorrect {

/// Reference word list with corpus frequencies. Words are case-folded.
class Dictionary {
 public:
  struct Entry {
    std::string word;
    std::uint64_t frequency = 0;
    std::u32string letters;  // code points, for edit distance
  };

  /// Adds or raises a word's frequency (the larger value wins).
  void add(std::string_view word, std::uint64_t frequency);

  bool contains(std::string_view word) const;
  std::optional<std::uint64_t> frequency(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::uint64_t max_frequency() const { return max_frequency_; }

  /// log(1 + f) / log(1 + max frequency), in [0, 1].
  double frequency_weight(std::uint64_t frequency) const;

  /// Entries whose code-point length is exactly `length`.
  std::vector<const Entry*> entries_of_length(std::size_t length) const;

  /// `word<TAB>frequency` per line; a missing frequency counts as 1.
  static Dictionary load(const std::filesystem::path& path);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::size_t, std::vector<std::size_t>> by_length_;
  std::uint64_t max_frequency_ = 0;
};

/// abbreviation -> ordered expansions. Keys are case-folded with one
/// trailing '.' removed; expansions keep their case.
using AbbreviationLexicon = std::map<std::string, std::vector<std::string>>;

/// term -> canonical form; keys case-folded.
using JargonMap = std::map<std::string, std::string>;

/// `abbr<TAB>expansion1|expansion2...` per line.
AbbreviationLexicon load_abbreviations(const std::filesystem::path& path);

/// `term<TAB>canonical` per line.
JargonMap load_jargon(const std::filesystem::path& path);

std::u32string to_code_points(std::string_view utf8);

/// Optimal string alignment distance: unit-cost insertion, deletion,
/// substitution and transposition of adjacent characters.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

/// edit_distance if it is at most `bound`, nullopt otherwise. Uses length
/// pruning and stops once two consecutive DP rows exceed the bound.
std::optional<std::size_t> bounded_edit_distance(std::u32string_view a,
                                                 std::u32string_view b,
                                                 std::size_t bound);

/// Fuzzy dictionary candidates within `max_edit` edits of the case-folded
/// word, best first.
///
/// An exact dictionary hit returns only itself with score 1.0. Otherwise
/// candidates are ranked by (distance ascending, frequency descending,
/// word ascending) and scored
///
///     score = 1 - (d + (1 - w_f) / 2) / (n + 1)
///
/// where d is the distance, n the query length in code points and w_f the
/// dictionary frequency weight. Frequency can move a score by at most half
/// a distance step, so scores never increase down the list. Clamped to
/// [0, 1].
std::vector<Candidate> spell_candidates(std::string_view word,
                                        const Dictionary& dictionary,
                                        std::size_t max_edit = 2,
                                        std::string_view source_id = "spell");

/// Case-insensitive lookup ignoring one trailing '.'; the k-th listed
/// expansion scores 1/k.
std::vector<Candidate> abbrev_candidates(std::string_view word,
                                         const AbbreviationLexicon& lexicon,
                                         std::string_view source_id = "abbrev");

std::vector<Candidate> jargon_candidates(std::string_view word,
                                         const JargonMap& jargon,
                                         std::string_view source_id = "jargon");

enum class SourceKind { local, remote };

struct SourceDescriptor {
  std::string source_id;
  IssueClass issue_class = IssueClass::misspelling;
  SourceKind kind = SourceKind::local;
  std::map<std::string, std::string> config;
};

/// GET <endpoint>?q=<word>, expecting
/// {"candidates":[{"replacement":string,"score":number},...]}.
/// Scores are clamped to [0, 1] and order is preserved.
///
/// Config keys: `endpoint` (required, http://host[:port][/path]) and
/// `timeout_ms` (default 2000). Throws Error with NetworkError or
/// BadResponse.
std::vector<Candidate> query_remote(const SourceDescriptor& source,
                                    std::string_view word);

/// A knowledge source for one issue class. `lookup` may throw Error for
/// transient failures; callers degrade the feature rather than abort.
class KnowledgeSource {
 public:
  virtual ~KnowledgeSource() = default;
  virtual const SourceDescriptor& descriptor() const = 0;
  virtual std::vector<Candidate> lookup(std::string_view word) const = 0;
};

class SpellSource final : public KnowledgeSource {
 public:
  SpellSource(std::shared_ptr<const Dictionary> dictionary,
              std::size_t max_edit = 2, std::string source_id = "spell");
  const SourceDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Candidate> lookup(std::string_view word) const override;

 private:
  std::shared_ptr<const Dictionary> dictionary_;
  std::size_t max_edit_;
  SourceDescriptor descriptor_;
};

class AbbreviationSource final : public KnowledgeSource {
 public:
  explicit AbbreviationSource(std::shared_ptr<const AbbreviationLexicon> lexicon,
                              std::string source_id = "abbrev");
  const SourceDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Candidate> lookup(std::string_view word) const override;

 private:
  std::shared_ptr<const AbbreviationLexicon> lexicon_;
  SourceDescriptor descriptor_;
};

class JargonSource final : public KnowledgeSource {
 public:
  explicit JargonSource(std::shared_ptr<const JargonMap> jargon,
                        std::string source_id = "jargon");
  const SourceDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Candidate> lookup(std::string_view word) const override;

 private:
  std::shared_ptr<const JargonMap> jargon_;
  SourceDescriptor descriptor_;
};

class RemoteSource final : public KnowledgeSource {
 public:
  explicit RemoteSource(SourceDescriptor descriptor);
  const SourceDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Candidate> lookup(std::string_view word) const override {
    return query_remote(descriptor_, word);
  }

 private:
  SourceDescriptor descriptor_;
};

/// Lexicons loaded from a directory:
///   dictionary.tsv, abbreviations.tsv, jargon.tsv (each optional), and
///   remote.json, an optional list of
///   {"source_id", "issue_class", "endpoint", "timeout_ms"} objects.
struct Lexicons {
  std::shared_ptr<const Dictionary> dictionary;
  std::shared_ptr<const AbbreviationLexicon> abbreviations;
  std::shared_ptr<const JargonMap> jargon;
  std::vector<SourceDescriptor> remote;

  static Lexicons load(const std::filesystem::path& dir);
};

/// Configured sources per issue class, queried in the order listed.
struct SourceSet {
  std::vector<std::shared_ptr<const KnowledgeSource>> jargon;
  std::vector<std::shared_ptr<const KnowledgeSource>> abbreviation;
  std::vector<std::shared_ptr<const KnowledgeSource>> spelling;

  const std::vector<std::shared_ptr<const KnowledgeSource>>& for_issue(
      IssueClass issue) const;

  /// Local sources for every loaded lexicon, then any remote sources.
  static SourceSet from_lexicons(const Lexicons& lexicons,
                                 std::size_t max_edit = 2);
};

}  // namespace crowdcorrect
