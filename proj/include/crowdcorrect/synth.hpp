#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crowdcorrect/core.hpp"
#include "crowdcorrect/knowledge.hpp"

namespace crowdcorrect {

// Synthetic health/other corpus with injected lexical noise and recorded
// ground truth, for desk-scale benchmarks.

struct SynthConfig {
  std::size_t posts = 500;
  double misspelling_rate = 0.10;
  double abbreviation_rate = 0.05;
  double jargon_rate = 0.05;
  std::uint64_t seed = 42;
};

/// One injected corruption. `span` locates the corrupted token in the
/// post text; `truth` is the word it replaced.
struct Corruption {
  std::string post_id;
  Span span;
  IssueClass issue = IssueClass::misspelling;
  std::string surface;
  std::string truth;

  bool operator==(const Corruption&) const = default;
};

struct SynthPost {
  std::string id;
  std::string text;        // with noise
  std::string clean_text;  // same post before corruption
  std::vector<std::string> hashtags;
  int label = 0;  // 1 = health
};

struct SynthCorpus {
  std::vector<SynthPost> posts;
  std::vector<Corruption> corruptions;  // by post, then span
  Dictionary dictionary;
  AbbreviationLexicon abbreviations;
  JargonMap jargon;
  std::size_t word_tokens = 0;  // corruptible content tokens

  const Corruption* find(std::string_view post_id, Span span) const;
};

/// The 300-word vocabulary: 100 health words, 100 other-topic words and
/// 100 words shared by both.
const std::vector<std::string>& health_words();
const std::vector<std::string>& other_words();
const std::vector<std::string>& shared_words();

/// Deterministic in the config. Corruption counts are exact: round(rate x
/// word_tokens) for each class, on disjoint tokens. Misspellings are one
/// random edit (insert, delete, substitute, transpose) on words of at
/// least four letters, never landing on a known word or lexicon key.
/// Throws InvalidArgument when a rate cannot be met.
SynthCorpus generate_corpus(const SynthConfig& config);

/// Writes posts.jsonl, labels.csv, truth.csv and lexicons/{dictionary,
/// abbreviations,jargon}.tsv under `dir`.
void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

/// post_id,label with a header line.
std::map<std::string, int> load_labels(const std::filesystem::path& file);

}  // namespace crowdcorrect
