#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "crowdcorrect/knowledge.hpp"
#include "mock_server.hpp"
#include "support.hpp"

using namespace crowdcorrect;

namespace {

// Unmemoised recursion over suffixes, written from the distance definition.
std::size_t osa_reference(const std::u32string& a, const std::u32string& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i,
                                                               std::size_t j) -> std::size_t {
    if (i == 0) return j;
    if (j == 0) return i;
    if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
    std::size_t best = std::min({d(i - 1, j) + 1, d(i, j - 1) + 1,
                                 d(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1)});
    if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
      best = std::min(best, d(i - 2, j - 2) + 1);
    }
    memo[{i, j}] = best;
    return best;
  };
  return d(a.size(), b.size());
}

std::size_t dist(const std::string& a, const std::string& b) {
  return edit_distance(to_code_points(a), to_code_points(b));
}

Dictionary make_dictionary(std::initializer_list<std::pair<const char*, std::uint64_t>> words) {
  Dictionary dictionary;
  for (const auto& [w, f] : words) dictionary.add(w, f);
  return dictionary;
}

}  // namespace

TEST_CASE("edit distance examples") {
  CHECK(dist("", "") == 0);
  CHECK(dist("abc", "") == 3);
  CHECK(dist("healht", "health") == 1);  // one adjacent transposition
  CHECK(dist("cardo", "card") == 1);
  CHECK(dist("cardo", "cardio") == 1);
  CHECK(dist("kitten", "sitting") == 3);
  CHECK(dist("ca", "abc") == 3);  // OSA, not unrestricted Damerau
  CHECK(dist("caf\xC3\xA9", "cafe") == 1);  // code points, not bytes
}

TEST_CASE("property: edit distance matches the recursive definition") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto a = to_code_points(testing::random_word(rng, 0, 7, "abcd"));
    const auto b = to_code_points(testing::random_word(rng, 0, 7, "abcd"));
    const std::size_t expected = osa_reference(a, b);
    CHECK(edit_distance(a, b) == expected);
    CHECK(edit_distance(b, a) == expected);
    for (std::size_t bound = 0; bound <= 4; ++bound) {
      const auto bounded = bounded_edit_distance(a, b, bound);
      if (expected <= bound) {
        REQUIRE(bounded.has_value());
        CHECK(*bounded == expected);
      } else {
        CHECK_FALSE(bounded.has_value());
      }
    }
  }
}

TEST_CASE("dictionary") {
  Dictionary dictionary = make_dictionary({{"Health", 10}, {"card", 3}});
  dictionary.add("health", 4);
  CHECK(dictionary.contains("HEALTH"));
  CHECK(dictionary.frequency("health") == 10u);
  CHECK(dictionary.max_frequency() == 10u);
  CHECK(dictionary.frequency_weight(10) == doctest::Approx(1.0));
  CHECK(dictionary.frequency_weight(0) == doctest::Approx(0.0));
  CHECK(dictionary.frequency_weight(3) == doctest::Approx(std::log(4.0) / std::log(11.0)));
  CHECK(dictionary.entries_of_length(4).size() == 1);
  CHECK(dictionary.entries_of_length(9).empty());
}

TEST_CASE("spell_candidates examples") {
  const Dictionary health = make_dictionary({{"health", 10}});
  auto candidates = spell_candidates("healht", health);
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].replacement == "health");
  CHECK(candidates[0].source_id == "spell");
  CHECK(candidates[0].score == doctest::Approx(1.0 - 1.0 / 7.0));

  candidates = spell_candidates("Health", health);
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].score == 1.0);

  CHECK(spell_candidates("zzzzzzz", health).empty());

  const Dictionary cards = make_dictionary({{"card", 500}, {"cardio", 400}});
  candidates = spell_candidates("cardo", cards);
  REQUIRE(candidates.size() == 2);
  CHECK(candidates[0].replacement == "card");
  CHECK(candidates[1].replacement == "cardio");
  // Both are one edit away; n = 5, so the base similarity is 1 - 1/6.
  const double w_cardio = std::log(401.0) / std::log(501.0);
  CHECK(candidates[0].score == doctest::Approx(1.0 - 1.0 / 6.0));
  CHECK(candidates[1].score == doctest::Approx(1.0 - (1.0 + 0.5 * (1.0 - w_cardio)) / 6.0));
}

TEST_CASE("property: spell candidates are ranked and scores never increase") {
  std::mt19937_64 rng(13);
  Dictionary dictionary;
  for (int i = 0; i < 300; ++i) {
    dictionary.add(testing::random_word(rng, 2, 7, "abcde"), 1 + rng() % 1000);
  }
  for (int i = 0; i < 300; ++i) {
    const std::string query = testing::random_word(rng, 1, 7, "abcdef");
    const auto candidates = spell_candidates(query, dictionary);
    if (dictionary.contains(query)) {
      REQUIRE(candidates.size() == 1);
      CHECK(candidates[0].score == 1.0);
      continue;
    }
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      CHECK(candidates[k].score >= 0.0);
      CHECK(candidates[k].score <= 1.0);
      CHECK(dist(query, candidates[k].replacement) <= 2);
      if (k == 0) continue;
      CHECK(candidates[k - 1].score >= candidates[k].score);
      const auto d0 = dist(query, candidates[k - 1].replacement);
      const auto d1 = dist(query, candidates[k].replacement);
      CHECK(d0 <= d1);
      if (d0 == d1) {
        CHECK(*dictionary.frequency(candidates[k - 1].replacement) >=
              *dictionary.frequency(candidates[k].replacement));
      }
    }
  }
}

TEST_CASE("abbreviation and jargon lookups") {
  const AbbreviationLexicon lexicon = {{"hosp", {"hospital", "hospice"}}, {"aus", {"Australia"}}};
  auto candidates = abbrev_candidates("Hosp.", lexicon);
  REQUIRE(candidates.size() == 2);
  CHECK(candidates[0] == Candidate{"hospital", 1.0, "abbrev"});
  CHECK(candidates[1].replacement == "hospice");
  CHECK(candidates[1].score == doctest::Approx(0.5));
  CHECK(abbrev_candidates("Aus.", lexicon) ==
        std::vector<Candidate>{{"Australia", 1.0, "abbrev"}});
  CHECK(abbrev_candidates("plan", lexicon).empty());

  const JargonMap jargon = {{"cardiologist", "doctor"}, {"neurologist", "doctor"}};
  CHECK(jargon_candidates("cardiologist", jargon) ==
        std::vector<Candidate>{{"doctor", 1.0, "jargon"}});
  CHECK(jargon_candidates("Neurologist", jargon) ==
        std::vector<Candidate>{{"doctor", 1.0, "jargon"}});
  CHECK(jargon_candidates("doctor", jargon).empty());
}

TEST_CASE("lexicon loading") {
  testing::TempDir dir;
  testing::write_text(dir / "lex" / "dictionary.tsv", "health\t1000\nHospital\t800\nplan\n");
  testing::write_text(dir / "lex" / "abbreviations.tsv", "Hosp.\thospital|hospice\n");
  testing::write_text(dir / "lex" / "jargon.tsv", "Cardiologist\tdoctor\n");
  const Lexicons lexicons = Lexicons::load(dir / "lex");
  CHECK(lexicons.dictionary->frequency("hospital") == 800u);
  CHECK(lexicons.dictionary->frequency("plan") == 1u);
  CHECK(lexicons.abbreviations->at("hosp") == std::vector<std::string>{"hospital", "hospice"});
  CHECK(lexicons.jargon->at("cardiologist") == "doctor");

  const SourceSet sources = SourceSet::from_lexicons(lexicons);
  CHECK(sources.for_issue(IssueClass::jargon).size() == 1);
  CHECK(sources.for_issue(IssueClass::abbreviation).size() == 1);
  CHECK(sources.for_issue(IssueClass::misspelling).size() == 1);

  const Lexicons bundled = Lexicons::load(std::filesystem::path(CROWDCORRECT_DATA_DIR) / "lexicons");
  CHECK(bundled.dictionary->contains("health"));
  CHECK(abbrev_candidates("Hosp.", *bundled.abbreviations).front().replacement == "hospital");
}

TEST_CASE("remote source") {
  testing::MockServer mock;
  mock.server().Get("/spell", [](const httplib::Request& req, httplib::Response& res) {
    if (req.get_param_value("q") == "healht") {
      res.set_content(R"({"candidates":[{"replacement":"health","score":1.0},)"
                      R"({"replacement":"hearth","score":1.7}]})",
                      "application/json");
    } else {
      res.set_content(R"({"candidates":[]})", "application/json");
    }
  });
  mock.server().Get("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"candidates":[]})", "application/json");
  });
  mock.server().Get("/bad", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"results":[]})", "application/json");
  });
  mock.server().Get("/error", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  mock.start();

  auto source = [&](const std::string& path) {
    SourceDescriptor d;
    d.source_id = "remote";
    d.kind = SourceKind::remote;
    d.config = {{"endpoint", mock.url(path)}, {"timeout_ms", "150"}};
    return d;
  };

  const auto candidates = query_remote(source("/spell"), "healht");
  REQUIRE(candidates.size() == 2);
  CHECK(candidates[0] == Candidate{"health", 1.0, "remote"});
  CHECK(candidates[1].score == 1.0);  // clamped
  CHECK(query_remote(source("/spell"), "plan").empty());

  auto code_of = [&](const std::string& path) {
    try {
      query_remote(source(path), "healht");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("/slow") == ErrorCode::NetworkError);
  CHECK(code_of("/bad") == ErrorCode::BadResponse);
  CHECK(code_of("/error") == ErrorCode::BadResponse);

  const int port = mock.port();
  mock.stop();
  SourceDescriptor dead;
  dead.source_id = "dead";
  dead.config = {{"endpoint", "http://127.0.0.1:" + std::to_string(port) + "/spell"},
                 {"timeout_ms", "150"}};
  CHECK_THROWS_AS(query_remote(dead, "healht"), Error);

  SourceDescriptor missing;
  missing.source_id = "missing";
  CHECK_THROWS_AS(query_remote(missing, "healht"), Error);
}
