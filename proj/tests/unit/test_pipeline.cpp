#include <doctest.h>

#include <cmath>
#include <set>

#include "crowdcorrect/pipeline.hpp"
#include "support.hpp"

using namespace crowdcorrect;

namespace {

std::size_t count_issue(const SynthCorpus& corpus, IssueClass issue) {
  return static_cast<std::size_t>(std::count_if(
      corpus.corruptions.begin(), corpus.corruptions.end(),
      [&](const Corruption& c) { return c.issue == issue; }));
}

}  // namespace

TEST_CASE("vocabulary lists") {
  CHECK(health_words().size() == 100);
  CHECK(other_words().size() == 100);
  CHECK(shared_words().size() == 100);
  std::set<std::string> all(health_words().begin(), health_words().end());
  all.insert(other_words().begin(), other_words().end());
  all.insert(shared_words().begin(), shared_words().end());
  CHECK(all.size() == 300);
  for (const auto& w : all) CHECK_FALSE(default_stopwords().contains(w));
}

TEST_CASE("property: synthetic corruptions are exact and recoverable") {
  for (std::uint64_t seed : {1u, 2u, 42u}) {
    SynthConfig config;
    config.posts = 200;
    config.seed = seed;
    const SynthCorpus corpus = generate_corpus(config);
    REQUIRE(corpus.posts.size() == 200);

    auto expected = [&](double rate) {
      return static_cast<std::size_t>(std::llround(rate * static_cast<double>(corpus.word_tokens)));
    };
    CHECK(count_issue(corpus, IssueClass::misspelling) == expected(config.misspelling_rate));
    CHECK(count_issue(corpus, IssueClass::abbreviation) == expected(config.abbreviation_rate));
    CHECK(count_issue(corpus, IssueClass::jargon) == expected(config.jargon_rate));

    std::map<std::string, const SynthPost*> by_id;
    std::set<std::string> labels_seen;
    for (const auto& post : corpus.posts) {
      by_id[post.id] = &post;
      CHECK((post.label == 0 || post.label == 1));
    }
    std::map<std::string, std::size_t> last_end;
    for (const auto& c : corpus.corruptions) {
      const SynthPost& post = *by_id.at(c.post_id);
      CHECK(post.text.substr(c.span.start, c.span.length()) == c.surface);
      CHECK(casefold(c.surface) != casefold(c.truth));
      CHECK(corpus.dictionary.contains(c.truth));
      CHECK(corpus.find(c.post_id, c.span) == &c);
      if (auto it = last_end.find(c.post_id); it != last_end.end()) {
        CHECK(c.span.start > it->second);
      }
      last_end[c.post_id] = c.span.end;
      const std::string key = casefold(strip_trailing_period(c.surface));
      switch (c.issue) {
        case IssueClass::misspelling:
          CHECK_FALSE(corpus.dictionary.contains(key));
          CHECK_FALSE(corpus.jargon.contains(key));
          CHECK_FALSE(corpus.abbreviations.contains(key));
          break;
        case IssueClass::abbreviation:
          REQUIRE(corpus.abbreviations.contains(key));
          CHECK(corpus.abbreviations.at(key).front() == casefold(c.truth));
          break;
        case IssueClass::jargon:
          REQUIRE(corpus.jargon.contains(key));
          CHECK(corpus.jargon.at(key) == casefold(c.truth));
          break;
        case IssueClass::none:
          FAIL("corruption without a class");
      }
    }
  }
}

TEST_CASE("synthetic corpus is a pure function of the seed") {
  SynthConfig config;
  config.posts = 50;
  const auto a = generate_corpus(config);
  const auto b = generate_corpus(config);
  REQUIRE(a.posts.size() == b.posts.size());
  for (std::size_t i = 0; i < a.posts.size(); ++i) CHECK(a.posts[i].text == b.posts[i].text);
  CHECK(a.corruptions == b.corruptions);
  config.seed = 43;
  CHECK(generate_corpus(config).corruptions != a.corruptions);

  config.posts = 2;
  config.misspelling_rate = 0.9;
  config.jargon_rate = 0.9;
  CHECK_THROWS_AS(generate_corpus(config), Error);
}

TEST_CASE("written corpus round trips") {
  testing::TempDir dir;
  SynthConfig config;
  config.posts = 30;
  const SynthCorpus corpus = generate_corpus(config);
  write_corpus(dir.path(), corpus);
  const auto labels = load_labels(dir / "labels.csv");
  REQUIRE(labels.size() == 30);
  for (const auto& post : corpus.posts) CHECK(labels.at(post.id) == post.label);

  PostStore store = PostStore::open(dir / "store");
  const auto stats = ingest_file(dir / "posts.jsonl", store);
  CHECK(stats.accepted == 30);
  CHECK(store.find(corpus.posts[0].id)->text == corpus.posts[0].text);
  const Lexicons lexicons = Lexicons::load(dir / "lexicons");
  CHECK(lexicons.dictionary->size() == corpus.dictionary.size());
  CHECK(*lexicons.jargon == corpus.jargon);
}

TEST_CASE("small benchmark end to end") {
  testing::TempDir dir;
  BenchmarkConfig config;
  config.synth.posts = 120;
  config.work_dir = dir / "a";
  const BenchmarkResult first = run_benchmark(config);
  CHECK(first.posts == 120);
  CHECK(first.corruptions > 0);
  CHECK(first.resolution_rate >= 0.9);
  CHECK(first.crowd_rounds >= 1);
  REQUIRE(first.eval.has_value());
  CHECK(first.eval->rows.size() == 4);
  std::size_t injected = 0;
  for (const auto& [issue, tally] : first.by_class) {
    CHECK(tally.resolved <= tally.injected);
    injected += tally.injected;
  }
  CHECK(injected == first.corruptions);

  for (const char* name : {"curated.jsonl", "summary.csv", "report.json"}) {
    CHECK(std::filesystem::exists(config.work_dir / "out" / name));
  }
  const auto report = nlohmann::json::parse(testing::read_text(config.work_dir / "out" / "report.json"));
  CHECK(report["corruptions"]["injected"] == first.corruptions);
  CHECK(report.contains("eval"));

  config.work_dir = dir / "b";
  run_benchmark(config);
  for (const char* name : {"curated.jsonl", "summary.csv", "report.json"}) {
    CHECK(testing::read_text(dir / "a" / "out" / name) ==
          testing::read_text(dir / "b" / "out" / name));
  }
}

TEST_CASE("perfect crowd resolves every corruption") {
  testing::TempDir dir;
  BenchmarkConfig config;
  config.synth.posts = 80;
  config.crowd.accuracy = 1.0;
  config.evaluate = false;
  config.work_dir = dir.path();
  const BenchmarkResult result = run_benchmark(config);
  CHECK(result.resolved == result.corruptions);
  CHECK_FALSE(result.eval.has_value());
}
