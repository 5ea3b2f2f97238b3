#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "crowdcorrect/extract.hpp"
#include "crowdcorrect/ingest.hpp"
#include "crowdcorrect/knowledge.hpp"

namespace crowdcorrect {

struct AutoCorrectConfig {
  double accept_threshold = 0.8;
  double accept_margin = 0.1;

  /// Throws InvalidArgument unless 0 < threshold <= 1 and margin >= 0.
  void validate() const;
};

struct Classification {
  IssueClass issue = IssueClass::none;
  std::vector<Candidate> candidates;
  // A source failed while answering; the feature must go to the crowd.
  bool degraded = false;
  std::vector<std::string> errors;
};

/// Candidates from every source configured for `issue`, merged by score
/// (stable, first occurrence of a replacement wins). Source errors are
/// recorded in `result` and otherwise treated as empty answers.
std::vector<Candidate> lookup_candidates(const SourceSet& sources,
                                         IssueClass issue,
                                         std::string_view surface,
                                         Classification* result = nullptr);

/// Decides the issue class of a keyword.
///
/// A dictionary word with no jargon entry is clean. Otherwise jargon,
/// abbreviation and spelling sources are consulted in that order and the
/// first to answer decides the class. An OOV word nobody recognises is a
/// misspelling with no candidates. A trailing '.' kept by the tokenizer is
/// ignored for the dictionary, jargon and spelling lookups.
Classification classify_issue(const FeatureRecord& feature,
                              const SourceSet& sources,
                              const Dictionary* dictionary);

struct AutoCorrectSummary {
  std::size_t clean = 0;
  std::size_t auto_corrected = 0;
  std::size_t needs_crowd = 0;
  std::size_t degraded = 0;
};

/// Annotates keyword features in place. Non-keyword features and features
/// already handled by the crowd are left alone.
AutoCorrectSummary auto_correct_corpus(std::vector<FeatureRecord>& features,
                                       const SourceSet& sources,
                                       const Dictionary* dictionary,
                                       const AutoCorrectConfig& config);

/// Replacement as it should appear in the text: initial capital iff the
/// surface has one, and a tokenizer-kept trailing '.' survives unless the
/// surface was an abbreviation.
std::string correction_for(std::string_view surface, std::string_view replacement,
                           IssueClass issue);

struct TextEdit {
  Span span;
  std::string replacement;
};

/// Applies edits right to left. Throws OverlappingSpans or InvalidField
/// (span outside the text).
std::string apply_edits(std::string_view text, std::vector<TextEdit> edits);

/// Rewrites the post text with every corrected feature (auto or crowd).
/// The replacement's initial letter follows the surface's capitalisation.
std::string apply_corrections(const RawPost& post,
                              const std::vector<FeatureRecord>& features);

bool is_corrected(const FeatureRecord& feature);

}  // namespace crowdcorrect
