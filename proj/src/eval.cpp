#include "crowdcorrect/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "crowdcorrect/random.hpp"

namespace crowdcorrect {

namespace {

bool all_lower_alpha(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(const SparseRow& row, std::span<const double> weights) {
  double z = weights.back();
  for (const auto& [index, value] : row) z += weights[index] * value;
  return z;
}

void require_width(const DesignMatrix& matrix, std::span<const double> weights) {
  if (weights.size() != matrix.features() + 1) {
    throw Error(ErrorCode::InvalidArgument, "weight vector has the wrong length");
  }
}

}  // namespace

std::vector<std::string> analyze(std::string_view text, const WordSet& stopwords) {
  std::vector<std::string> stems;
  for (const Token& token : tokenize(text)) {
    std::string surface;
    switch (token.kind) {
      case TokenKind::word: surface = token.surface; break;
      case TokenKind::hashtag: surface = token.surface.substr(1); break;
      case TokenKind::number: stems.push_back(token.surface); continue;
      default: continue;
    }
    if (stopwords.contains(stopword_key(surface))) continue;
    std::string folded = casefold(strip_trailing_period(surface));
    if (folded.empty()) continue;
    stems.push_back(all_lower_alpha(folded) ? porter_stem(folded) : folded);
  }
  return stems;
}

std::vector<std::string> build_vocabulary(std::span<const std::vector<std::string>> documents,
                                          std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& document : documents) {
    for (const auto& stem : document) ++counts[stem];
  }
  std::vector<std::string> vocabulary;
  for (const auto& [stem, count] : counts) {
    if (count >= min_count) vocabulary.push_back(stem);
  }
  return vocabulary;
}

DesignMatrix vectorize(std::span<const std::vector<std::string>> documents,
                       std::span<const int> labels,
                       const std::vector<std::string>& vocabulary) {
  if (documents.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "documents and labels differ in length");
  }
  std::map<std::string_view, std::uint32_t> index;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    index.emplace(vocabulary[i], static_cast<std::uint32_t>(i));
  }
  DesignMatrix matrix;
  matrix.vocabulary = vocabulary;
  matrix.labels.assign(labels.begin(), labels.end());
  for (const auto& document : documents) {
    std::map<std::uint32_t, double> counts;
    for (const auto& stem : document) {
      if (auto it = index.find(stem); it != index.end()) counts[it->second] += 1.0;
    }
    matrix.rows.emplace_back(counts.begin(), counts.end());
  }
  return matrix;
}

DesignMatrix preprocess(std::span<const Document> documents, const WordSet& stopwords,
                        std::size_t min_count) {
  if (documents.empty()) throw Error(ErrorCode::InvalidArgument, "empty corpus");
  std::vector<std::vector<std::string>> analyzed;
  std::vector<int> labels;
  for (const auto& document : documents) {
    analyzed.push_back(analyze(document.text, stopwords));
    labels.push_back(document.label);
  }
  auto vocabulary = build_vocabulary(analyzed, min_count);
  if (vocabulary.empty()) {
    throw Error(ErrorCode::EmptyVocabulary, "no stem occurs often enough");
  }
  return vectorize(analyzed, labels, vocabulary);
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::logistic ? "logistic" : "hinge_sgd";
}

double LinearModel::decision(const SparseRow& row) const { return dot(row, weights); }

double LinearModel::probability(const SparseRow& row) const { return sigmoid(decision(row)); }

int LinearModel::predict(const SparseRow& row) const {
  const double z = decision(row);
  return kind == ModelKind::logistic ? (sigmoid(z) >= 0.5 ? 1 : 0) : (z > 0 ? 1 : 0);
}

double logistic_loss(const DesignMatrix& matrix, std::span<const double> weights) {
  require_width(matrix, weights);
  if (matrix.rows.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    const double z = dot(matrix.rows[i], weights);
    total += softplus(z) - (matrix.labels[i] == 1 ? z : 0.0);
  }
  return total / static_cast<double>(matrix.rows.size());
}

std::vector<double> logistic_gradient(const DesignMatrix& matrix,
                                      std::span<const double> weights) {
  require_width(matrix, weights);
  std::vector<double> gradient(weights.size(), 0.0);
  if (matrix.rows.empty()) return gradient;
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    const double error = sigmoid(dot(matrix.rows[i], weights)) - matrix.labels[i];
    for (const auto& [index, value] : matrix.rows[i]) gradient[index] += error * value;
    gradient.back() += error;
  }
  const double n = static_cast<double>(matrix.rows.size());
  for (double& g : gradient) g /= n;
  return gradient;
}

double hinge_loss(const DesignMatrix& matrix, std::span<const double> weights) {
  require_width(matrix, weights);
  if (matrix.rows.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    const double y = matrix.labels[i] == 1 ? 1.0 : -1.0;
    total += std::max(0.0, 1.0 - y * dot(matrix.rows[i], weights));
  }
  return total / static_cast<double>(matrix.rows.size());
}

LinearModel train(const DesignMatrix& matrix, ModelKind kind, const Hyper& hyper) {
  const auto positives = std::count(matrix.labels.begin(), matrix.labels.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(matrix.labels.size())) {
    throw Error(ErrorCode::InvalidArgument, "training needs both classes");
  }
  LinearModel model;
  model.kind = kind;
  model.hyper = hyper;
  model.vocabulary = matrix.vocabulary;
  model.weights.assign(matrix.features() + 1, 0.0);

  auto record_loss = [&] {
    const double loss = kind == ModelKind::logistic ? logistic_loss(matrix, model.weights)
                                                    : hinge_loss(matrix, model.weights);
    if (!std::isfinite(loss)) {
      throw Error(ErrorCode::DivergenceDetected, "loss became non-finite");
    }
    for (double w : model.weights) {
      if (!std::isfinite(w)) throw Error(ErrorCode::DivergenceDetected, "weights overflowed");
    }
    model.loss_history.push_back(loss);
  };

  if (kind == ModelKind::logistic) {
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
      record_loss();
      const auto gradient = logistic_gradient(matrix, model.weights);
      for (std::size_t k = 0; k < gradient.size(); ++k) {
        model.weights[k] -= hyper.learning_rate * gradient[k];
      }
    }
  } else {
    std::mt19937_64 rng(derive_seed(hyper.seed, "hinge_sgd"));
    std::vector<std::size_t> order(matrix.rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
      record_loss();
      shuffle_in_place(order, rng);
      for (std::size_t i : order) {
        const double y = matrix.labels[i] == 1 ? 1.0 : -1.0;
        if (y * dot(matrix.rows[i], model.weights) >= 1.0) continue;
        for (const auto& [index, value] : matrix.rows[i]) {
          model.weights[index] += hyper.learning_rate * y * value;
        }
        model.weights.back() += hyper.learning_rate * y;
      }
    }
  }
  record_loss();
  return model;
}

Metrics metrics_from_predictions(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorCode::InvalidArgument, "prediction and label counts differ");
  }
  Metrics m;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == 1;
    const bool a = actual[i] == 1;
    if (p && a) ++m.tp;
    if (p && !a) ++m.fp;
    if (!p && a) ++m.fn;
    if (!p && !a) ++m.tn;
  }
  if (m.tp + m.fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  }
  if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

Metrics evaluate(const LinearModel& model, const DesignMatrix& matrix) {
  if (model.vocabulary != matrix.vocabulary) {
    throw Error(ErrorCode::PreconditionFailed, "model and matrix vocabularies differ");
  }
  std::vector<int> predicted;
  predicted.reserve(matrix.rows.size());
  for (const auto& row : matrix.rows) predicted.push_back(model.predict(row));
  return metrics_from_predictions(predicted, matrix.labels);
}

Split stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, "split"));
  Split split;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    shuffle_in_place(members, rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < n_test ? split.test : split.train).push_back(members[k]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

const EvalRow& EvalReport::row(ModelKind classifier, std::string_view dataset) const {
  for (const auto& r : rows) {
    if (r.classifier == classifier && r.dataset == dataset) return r;
  }
  throw Error(ErrorCode::InvalidArgument, "no such report row");
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json out;
  out["hyper"] = {{"learning_rate", hyper.learning_rate},
                  {"epochs", hyper.epochs},
                  {"seed", hyper.seed}};
  out["split"] = {{"train", train_size}, {"test", test_size}, {"test_fraction", 0.2}};
  out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    out["rows"].push_back({{"classifier", to_string(r.classifier)},
                           {"dataset", r.dataset},
                           {"precision", r.metrics.precision},
                           {"recall", r.metrics.recall},
                           {"f1", r.metrics.f1},
                           {"precision_undefined", r.metrics.precision_undefined},
                           {"tp", r.metrics.tp},
                           {"fp", r.metrics.fp},
                           {"fn", r.metrics.fn},
                           {"tn", r.metrics.tn}});
  }
  out["deltas"] = nlohmann::json::array();
  for (const auto& d : deltas) {
    out["deltas"].push_back({{"classifier", to_string(d.classifier)},
                             {"precision", d.precision},
                             {"recall", d.recall},
                             {"f1", d.f1}});
  }
  return out;
}

EvalReport compare(std::span<const std::string> raw_texts,
                   std::span<const std::string> curated_texts, std::span<const int> labels,
                   const Hyper& hyper, const WordSet& stopwords) {
  if (raw_texts.size() != curated_texts.size() || raw_texts.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "raw, curated and labels must align");
  }
  const Split split = stratified_split(labels, 0.2, hyper.seed);
  EvalReport report;
  report.hyper = hyper;
  report.train_size = split.train.size();
  report.test_size = split.test.size();

  auto matrices = [&](std::span<const std::string> texts) {
    std::vector<std::vector<std::string>> train_docs, test_docs;
    std::vector<int> train_labels, test_labels;
    for (std::size_t i : split.train) {
      train_docs.push_back(analyze(texts[i], stopwords));
      train_labels.push_back(labels[i]);
    }
    for (std::size_t i : split.test) {
      test_docs.push_back(analyze(texts[i], stopwords));
      test_labels.push_back(labels[i]);
    }
    auto vocabulary = build_vocabulary(train_docs);
    if (vocabulary.empty()) {
      throw Error(ErrorCode::EmptyVocabulary, "no stem occurs often enough");
    }
    return std::pair{vectorize(train_docs, train_labels, vocabulary),
                     vectorize(test_docs, test_labels, vocabulary)};
  };
  const auto raw = matrices(raw_texts);
  const auto curated = matrices(curated_texts);

  for (ModelKind kind : {ModelKind::logistic, ModelKind::hinge_sgd}) {
    const auto raw_model = train(raw.first, kind, hyper);
    const auto curated_model = train(curated.first, kind, hyper);
    const Metrics raw_metrics = evaluate(raw_model, raw.second);
    const Metrics curated_metrics = evaluate(curated_model, curated.second);
    report.rows.push_back({kind, "raw", raw_metrics});
    report.rows.push_back({kind, "curated", curated_metrics});
    report.deltas.push_back({kind, curated_metrics.precision - raw_metrics.precision,
                             curated_metrics.recall - raw_metrics.recall,
                             curated_metrics.f1 - raw_metrics.f1});
  }
  return report;
}

}  // namespace crowdcorrect
