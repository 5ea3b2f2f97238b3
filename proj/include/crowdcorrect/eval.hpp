#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crowdcorrect/extract.hpp"

namespace crowdcorrect {

/// Porter (1980) suffix stripping, steps 1a-5b as originally published.
/// Expects a lowercase alphabetic word; words of one or two letters are
/// returned unchanged.
std::string porter_stem(std::string_view word);

/// Tokenize, drop punctuation, urls, mentions and stopwords, case-fold and
/// stem purely alphabetic tokens. Hashtags contribute their body; numbers
/// are kept verbatim.
std::vector<std::string> analyze(std::string_view text, const WordSet& stopwords);

using SparseRow = std::vector<std::pair<std::uint32_t, double>>;  // sorted by index

struct DesignMatrix {
  std::vector<std::string> vocabulary;  // sorted, unique
  std::vector<SparseRow> rows;
  std::vector<int> labels;  // 1 = category, 0 = other

  std::size_t features() const { return vocabulary.size(); }
};

/// Stems with at least `min_count` occurrences across the documents.
std::vector<std::string> build_vocabulary(
    std::span<const std::vector<std::string>> documents, std::size_t min_count = 3);

/// Count vectors over a fixed vocabulary; unknown stems are dropped.
DesignMatrix vectorize(std::span<const std::vector<std::string>> documents,
                       std::span<const int> labels,
                       const std::vector<std::string>& vocabulary);

struct Document {
  std::string text;
  int label = 0;
};

/// analyze + build_vocabulary + vectorize on one corpus. Throws
/// EmptyVocabulary when nothing survives filtering, InvalidArgument for an
/// empty corpus.
DesignMatrix preprocess(std::span<const Document> documents, const WordSet& stopwords,
                        std::size_t min_count = 3);

enum class ModelKind { logistic, hinge_sgd };

std::string_view to_string(ModelKind kind);

struct Hyper {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  std::uint64_t seed = 42;
};

struct LinearModel {
  ModelKind kind = ModelKind::logistic;
  Hyper hyper;
  std::vector<std::string> vocabulary;
  std::vector<double> weights;  // features, then bias
  std::vector<double> loss_history;  // loss at the start of each epoch, then final

  double decision(const SparseRow& row) const;
  /// Logistic probability of the positive class.
  double probability(const SparseRow& row) const;
  /// p >= 0.5 for logistic models, decision > 0 for hinge models.
  int predict(const SparseRow& row) const;
};

/// Mean cross-entropy; weights has features + 1 entries.
double logistic_loss(const DesignMatrix& matrix, std::span<const double> weights);
std::vector<double> logistic_gradient(const DesignMatrix& matrix,
                                      std::span<const double> weights);
double hinge_loss(const DesignMatrix& matrix, std::span<const double> weights);

/// Logistic: full-batch gradient descent on mean cross-entropy from zero
/// weights. Hinge: per-example subgradient steps on the hinge loss, with a
/// seeded reshuffle every epoch. Throws DivergenceDetected on a non-finite
/// loss and InvalidArgument unless both classes are present.
LinearModel train(const DesignMatrix& matrix, ModelKind kind, const Hyper& hyper);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // No positive predictions; precision is reported as 0.
  bool precision_undefined = false;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Metrics metrics_from_predictions(std::span<const int> predicted, std::span<const int> actual);

/// Throws PreconditionFailed if the vocabularies differ.
Metrics evaluate(const LinearModel& model, const DesignMatrix& matrix);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class seeded shuffle; round(test_fraction * n_class) of each class
/// go to test. Both index lists come back sorted.
Split stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed);

struct EvalRow {
  ModelKind classifier = ModelKind::logistic;
  std::string dataset;  // "raw" | "curated"
  Metrics metrics;
};

struct EvalDelta {
  ModelKind classifier = ModelKind::logistic;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  Hyper hyper;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<EvalRow> rows;      // (logistic|hinge_sgd) x (raw|curated)
  std::vector<EvalDelta> deltas;  // curated - raw, absolute points as fractions

  const EvalRow& row(ModelKind classifier, std::string_view dataset) const;
  nlohmann::json to_json() const;
};

/// Trains both classifiers on both corpora over one shared stratified
/// 80/20 split and reports held-out metrics. Corpora are aligned by index.
EvalReport compare(std::span<const std::string> raw_texts,
                   std::span<const std::string> curated_texts,
                   std::span<const int> labels, const Hyper& hyper,
                   const WordSet& stopwords = default_stopwords());

}  // namespace crowdcorrect
