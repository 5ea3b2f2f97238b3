#include "crowdcorrect/autocorrect.hpp"

#include <algorithm>
#include <unordered_set>

namespace crowdcorrect {

void AutoCorrectConfig::validate() const {
  if (!(accept_threshold > 0.0 && accept_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "accept_threshold must be in (0, 1]");
  }
  if (!(accept_margin >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "accept_margin must be >= 0");
  }
}

std::vector<Candidate> lookup_candidates(const SourceSet& sources,
                                         IssueClass issue,
                                         std::string_view surface,
                                         Classification* result) {
  // Abbreviation lookups see the trailing '.'; the others do not.
  const std::string_view query =
      issue == IssueClass::abbreviation ? surface : strip_trailing_period(surface);
  std::vector<Candidate> merged;
  for (const auto& source : sources.for_issue(issue)) {
    try {
      auto found = source->lookup(query);
      merged.insert(merged.end(), std::make_move_iterator(found.begin()),
                    std::make_move_iterator(found.end()));
    } catch (const Error& e) {
      if (result) {
        result->degraded = true;
        result->errors.push_back(source->descriptor().source_id + ": " + e.what());
      }
    }
  }
  std::stable_sort(merged.begin(), merged.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  std::unordered_set<std::string> seen;
  std::vector<Candidate> out;
  for (auto& candidate : merged) {
    if (seen.insert(casefold(candidate.replacement)).second) {
      out.push_back(std::move(candidate));
    }
  }
  return out;
}

Classification classify_issue(const FeatureRecord& feature,
                              const SourceSet& sources,
                              const Dictionary* dictionary) {
  if (feature.kind != FeatureKind::keyword) {
    throw Error(ErrorCode::PreconditionFailed,
                "classify_issue needs a keyword feature: " + feature.feature_id);
  }
  Classification result;
  auto jargon = lookup_candidates(sources, IssueClass::jargon, feature.surface, &result);
  const std::string bare = casefold(strip_trailing_period(feature.surface));
  if (jargon.empty() && dictionary && dictionary->contains(bare)) {
    result.issue = IssueClass::none;
    return result;
  }
  if (!jargon.empty()) {
    result.issue = IssueClass::jargon;
    result.candidates = std::move(jargon);
    return result;
  }
  auto abbreviations =
      lookup_candidates(sources, IssueClass::abbreviation, feature.surface, &result);
  if (!abbreviations.empty()) {
    result.issue = IssueClass::abbreviation;
    result.candidates = std::move(abbreviations);
    return result;
  }
  result.issue = IssueClass::misspelling;
  result.candidates =
      lookup_candidates(sources, IssueClass::misspelling, feature.surface, &result);
  return result;
}

AutoCorrectSummary auto_correct_corpus(std::vector<FeatureRecord>& features,
                                       const SourceSet& sources,
                                       const Dictionary* dictionary,
                                       const AutoCorrectConfig& config) {
  config.validate();
  AutoCorrectSummary summary;
  for (auto& feature : features) {
    if (feature.kind != FeatureKind::keyword) continue;
    if (feature.status == FeatureStatus::crowd_corrected ||
        feature.status == FeatureStatus::unresolved) {
      continue;
    }
    feature.correction.reset();
    feature.provenance.reset();
    feature.candidates.clear();
    feature.correction_only = false;

    Classification result = classify_issue(feature, sources, dictionary);
    if (result.degraded) ++summary.degraded;
    if (result.issue == IssueClass::none && !result.degraded) {
      feature.status = FeatureStatus::clean;
      feature.issue_class = IssueClass::none;
      ++summary.clean;
      continue;
    }

    const auto& candidates = result.candidates;
    const double top = candidates.empty() ? 0.0 : candidates[0].score;
    const double second = candidates.size() > 1 ? candidates[1].score : 0.0;
    const bool accept = !result.degraded && !candidates.empty() &&
                        top >= config.accept_threshold &&
                        top - second >= config.accept_margin;
    feature.issue_class = result.issue;
    feature.candidates = candidates;
    if (accept) {
      feature.status = FeatureStatus::auto_corrected;
      feature.correction =
          correction_for(feature.surface, candidates[0].replacement, result.issue);
      feature.provenance =
          Provenance{CorrectionMethod::automatic, candidates[0].source_id, top};
      ++summary.auto_corrected;
    } else {
      feature.status = FeatureStatus::needs_crowd;
      // Exact lexicon hits settle the class; only the replacement is open.
      feature.correction_only = !result.degraded &&
                                (result.issue == IssueClass::jargon ||
                                 result.issue == IssueClass::abbreviation);
      if (result.issue == IssueClass::none) feature.issue_class.reset();
      ++summary.needs_crowd;
    }
  }
  return summary;
}

std::string correction_for(std::string_view surface, std::string_view replacement,
                           IssueClass issue) {
  std::string out = starts_with_upper(surface) ? capitalize_first(replacement)
                                               : lowercase_first(replacement);
  if (issue != IssueClass::abbreviation && !surface.empty() &&
      surface.back() == '.' && (out.empty() || out.back() != '.')) {
    out.push_back('.');
  }
  return out;
}

std::string apply_edits(std::string_view text, std::vector<TextEdit> edits) {
  std::sort(edits.begin(), edits.end(),
            [](const TextEdit& a, const TextEdit& b) { return a.span < b.span; });
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const Span& span = edits[i].span;
    if (span.start > span.end || span.end > text.size()) {
      throw Error(ErrorCode::InvalidField, "span outside text");
    }
    if (i > 0 && span.start < edits[i - 1].span.end) {
      throw Error(ErrorCode::OverlappingSpans, "overlapping correction spans");
    }
  }
  std::string out(text);
  for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
    out.replace(it->span.start, it->span.length(), it->replacement);
  }
  return out;
}

bool is_corrected(const FeatureRecord& feature) {
  return (feature.status == FeatureStatus::auto_corrected ||
          feature.status == FeatureStatus::crowd_corrected) &&
         feature.correction && feature.span;
}

std::string apply_corrections(const RawPost& post,
                              const std::vector<FeatureRecord>& features) {
  std::vector<TextEdit> edits;
  for (const auto& feature : features) {
    if (!is_corrected(feature)) continue;
    const Span span = *feature.span;
    if (span.end > post.text.size()) {
      throw Error(ErrorCode::InvalidField, "span outside text: " + feature.feature_id);
    }
    const std::string_view original =
        std::string_view(post.text).substr(span.start, span.length());
    edits.push_back({span, starts_with_upper(original)
                               ? capitalize_first(*feature.correction)
                               : lowercase_first(*feature.correction)});
  }
  return apply_edits(post.text, std::move(edits));
}

}  // namespace crowdcorrect
