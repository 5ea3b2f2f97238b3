#include <doctest.h>

#include <random>

#include "crowdcorrect/autocorrect.hpp"
#include "support.hpp"

using namespace crowdcorrect;

namespace {

struct Fixture {
  std::shared_ptr<Dictionary> dictionary = std::make_shared<Dictionary>();
  SourceSet sources;

  Fixture() {
    for (const auto& [w, f] : std::vector<std::pair<std::string, std::uint64_t>>{
             {"health", 1000}, {"card", 500}, {"cardio", 400}, {"doctor", 900},
             {"hospital", 800}, {"plan", 700}, {"insurers", 150}, {"given", 500},
             {"all", 2000}, {"clear", 400}, {"running", 450}, {"short", 500},
             {"trained", 300}, {"doctors", 600}}) {
      dictionary->add(w, f);
    }
    auto abbreviations = std::make_shared<AbbreviationLexicon>(
        AbbreviationLexicon{{"hosp", {"hospital", "hospice"}}, {"aus", {"Australia"}}});
    auto jargon = std::make_shared<JargonMap>(
        JargonMap{{"cardiologist", "doctor"}, {"neurologist", "doctor"}});
    sources.spelling.push_back(std::make_shared<SpellSource>(dictionary));
    sources.abbreviation.push_back(std::make_shared<AbbreviationSource>(abbreviations));
    sources.jargon.push_back(std::make_shared<JargonSource>(jargon));
  }

  std::vector<FeatureRecord> keywords(const std::string& text) const {
    RawPost post;
    post.id = "p1";
    post.text = text;
    return extract_features(post, default_stopwords());
  }
};

FeatureRecord keyword(const std::string& surface) {
  FeatureRecord f;
  f.feature_id = "p1:0-" + std::to_string(surface.size());
  f.post_id = "p1";
  f.surface = surface;
  f.span = Span{0, surface.size()};
  return f;
}

class FailingSource final : public KnowledgeSource {
 public:
  FailingSource() { descriptor_.source_id = "down"; }
  const SourceDescriptor& descriptor() const override { return descriptor_; }
  std::vector<Candidate> lookup(std::string_view) const override {
    throw Error(ErrorCode::NetworkError, "connection refused");
  }

 private:
  SourceDescriptor descriptor_;
};

}  // namespace

TEST_CASE("classify_issue examples") {
  const Fixture fx;
  auto result = classify_issue(keyword("healht"), fx.sources, fx.dictionary.get());
  CHECK(result.issue == IssueClass::misspelling);
  REQUIRE_FALSE(result.candidates.empty());
  CHECK(result.candidates[0].replacement == "health");
  CHECK(result.candidates[0].score > 0.8);

  result = classify_issue(keyword("Hosp."), fx.sources, fx.dictionary.get());
  CHECK(result.issue == IssueClass::abbreviation);
  CHECK(result.candidates[0] == Candidate{"hospital", 1.0, "abbrev"});

  result = classify_issue(keyword("cardiologist"), fx.sources, fx.dictionary.get());
  CHECK(result.issue == IssueClass::jargon);
  CHECK(result.candidates == std::vector<Candidate>{{"doctor", 1.0, "jargon"}});

  result = classify_issue(keyword("Health"), fx.sources, fx.dictionary.get());
  CHECK(result.issue == IssueClass::none);

  result = classify_issue(keyword("qqqqqqqq"), fx.sources, fx.dictionary.get());
  CHECK(result.issue == IssueClass::misspelling);
  CHECK(result.candidates.empty());
}

TEST_CASE("auto_correct_corpus decisions") {
  const Fixture fx;
  std::vector<FeatureRecord> features = {keyword("healht"), keyword("Hosp."), keyword("cardo"),
                                         keyword("cardiologist"), keyword("plan")};
  const auto summary =
      auto_correct_corpus(features, fx.sources, fx.dictionary.get(), AutoCorrectConfig{});
  CHECK(summary.clean == 1);
  CHECK(summary.auto_corrected == 3);
  CHECK(summary.needs_crowd == 1);
  CHECK(summary.degraded == 0);

  CHECK(features[0].status == FeatureStatus::auto_corrected);
  CHECK(features[0].correction == "health");
  CHECK(features[0].provenance->method == CorrectionMethod::automatic);
  CHECK(features[0].provenance->source_id == "spell");

  CHECK(features[1].status == FeatureStatus::auto_corrected);
  CHECK(features[1].correction == "Hospital");
  CHECK(features[1].issue_class == IssueClass::abbreviation);

  // card and cardio are both one edit away; frequency separates them by
  // far less than the margin.
  CHECK(features[2].status == FeatureStatus::needs_crowd);
  CHECK(features[2].issue_class == IssueClass::misspelling);
  REQUIRE(features[2].candidates.size() == 2);
  CHECK(features[2].candidates[0].replacement == "card");
  CHECK_FALSE(features[2].correction_only);

  CHECK(features[3].status == FeatureStatus::auto_corrected);
  CHECK(features[3].correction == "doctor");

  CHECK(features[4].status == FeatureStatus::clean);
  CHECK(features[4].issue_class == IssueClass::none);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((AutoCorrectConfig{0.0, 0.1}.validate()), Error);
  CHECK_THROWS_AS((AutoCorrectConfig{1.5, 0.1}.validate()), Error);
  CHECK_THROWS_AS((AutoCorrectConfig{0.8, -0.1}.validate()), Error);
  CHECK_NOTHROW((AutoCorrectConfig{1.0, 0.0}.validate()));
}

TEST_CASE("ambiguous abbreviation is correction only") {
  const Fixture fx;
  std::vector<FeatureRecord> features = {keyword("Hosp.")};
  auto_correct_corpus(features, fx.sources, fx.dictionary.get(), AutoCorrectConfig{0.8, 0.6});
  CHECK(features[0].status == FeatureStatus::needs_crowd);
  CHECK(features[0].correction_only);
  CHECK(features[0].issue_class == IssueClass::abbreviation);
}

TEST_CASE("a failing source degrades the feature instead of aborting") {
  Fixture fx;
  fx.sources.spelling.insert(fx.sources.spelling.begin(), std::make_shared<FailingSource>());
  std::vector<FeatureRecord> features = {keyword("healht"), keyword("plan")};
  const auto summary =
      auto_correct_corpus(features, fx.sources, fx.dictionary.get(), AutoCorrectConfig{});
  CHECK(summary.degraded == 1);
  CHECK(features[0].status == FeatureStatus::needs_crowd);
  CHECK_FALSE(features[0].correction_only);
  CHECK(features[1].status == FeatureStatus::clean);
}

TEST_CASE("crowd outcomes are not overwritten") {
  const Fixture fx;
  FeatureRecord f = keyword("cardo");
  f.status = FeatureStatus::crowd_corrected;
  f.correction = "cardio";
  std::vector<FeatureRecord> features = {f};
  auto_correct_corpus(features, fx.sources, fx.dictionary.get(), AutoCorrectConfig{});
  CHECK(features[0] == f);
}

TEST_CASE("correction_for") {
  CHECK(correction_for("Healht", "health", IssueClass::misspelling) == "Health");
  CHECK(correction_for("healht", "Health", IssueClass::misspelling) == "health");
  CHECK(correction_for("Hosp.", "hospital", IssueClass::abbreviation) == "Hospital");
  CHECK(correction_for("Aus.", "Australia", IssueClass::abbreviation) == "Australia");
  CHECK(correction_for("doc.", "doctor", IssueClass::jargon) == "doctor.");
}

TEST_CASE("apply_corrections rewrites the text") {
  const Fixture fx;
  RawPost post;
  post.id = "p1";
  post.text = "Healht insurers given all clear";
  auto features = fx.keywords(post.text);
  auto_correct_corpus(features, fx.sources, fx.dictionary.get(), AutoCorrectConfig{});
  CHECK(apply_corrections(post, features) == "Health insurers given all clear");

  post.text = "Hosp. are running short on trained doctors";
  features = fx.keywords(post.text);
  auto_correct_corpus(features, fx.sources, fx.dictionary.get(), AutoCorrectConfig{});
  CHECK(apply_corrections(post, features) == "Hospital are running short on trained doctors");

  post.text = "my cardiologist says healht matters";
  features = fx.keywords(post.text);
  auto_correct_corpus(features, fx.sources, fx.dictionary.get(), AutoCorrectConfig{});
  CHECK(apply_corrections(post, features) == "my doctor says health matters");
}

TEST_CASE("apply_edits") {
  CHECK(apply_edits("abc def", {}) == "abc def");
  CHECK(apply_edits("abc def", {{Span{4, 7}, "x"}, {Span{0, 3}, "long"}}) == "long x");
  CHECK_THROWS_AS(apply_edits("abc", {{Span{1, 3}, "x"}, {Span{2, 3}, "y"}}), Error);
  try {
    apply_edits("abc", {{Span{0, 2}, "x"}, {Span{1, 3}, "y"}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OverlappingSpans);
  }
  try {
    apply_edits("abc", {{Span{2, 9}, "x"}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidField);
  }
}

TEST_CASE("property: edit lengths add up") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    const std::string text = testing::random_word(rng, 1, 40, "abc xyz");
    std::vector<TextEdit> edits;
    std::size_t pos = 0;
    long delta = 0;
    while (pos < text.size()) {
      const std::size_t start = pos + rng() % 4;
      if (start >= text.size()) break;
      const std::size_t end = std::min(text.size(), start + rng() % 5);
      const std::string replacement = testing::random_word(rng, 0, 6, "QRS");
      edits.push_back({Span{start, end}, replacement});
      delta += static_cast<long>(replacement.size()) - static_cast<long>(end - start);
      pos = end + 1;
    }
    std::shuffle(edits.begin(), edits.end(), rng);
    const std::string out = apply_edits(text, edits);
    CHECK(static_cast<long>(out.size()) == static_cast<long>(text.size()) + delta);
  }
}

TEST_CASE("property: summary partitions keywords and threshold is monotone") {
  const Fixture fx;
  std::mt19937_64 rng(19);
  const std::vector<std::string> vocabulary = {"healht", "Hosp.", "cardo", "cardiologist",
                                               "plan", "helth", "doctr", "cleer", "zzzz",
                                               "Aus.", "neurologist", "givne"};
  for (int round = 0; round < 100; ++round) {
    std::vector<FeatureRecord> base;
    for (std::size_t k = 0; k < 1 + rng() % 12; ++k) {
      base.push_back(keyword(vocabulary[rng() % vocabulary.size()]));
    }
    std::size_t previous = base.size() + 1;
    for (double threshold : {0.5, 0.7, 0.8, 0.9, 1.0}) {
      auto features = base;
      const auto summary = auto_correct_corpus(features, fx.sources, fx.dictionary.get(),
                                               AutoCorrectConfig{threshold, 0.05});
      CHECK(summary.clean + summary.auto_corrected + summary.needs_crowd == base.size());
      CHECK(summary.auto_corrected <= previous);
      previous = summary.auto_corrected;
      for (const auto& f : features) {
        if (f.status != FeatureStatus::auto_corrected) continue;
        CHECK(f.provenance->score >= threshold);
      }
    }
  }
}
