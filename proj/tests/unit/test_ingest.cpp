#include <doctest.h>

#include <json.hpp>
#include <random>

#include "crowdcorrect/ingest.hpp"
#include "support.hpp"

using namespace crowdcorrect;
using testing::TempDir;

namespace {

ErrorCode code_of(const std::string& line) {
  try {
    parse_post(line);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("parse_post maps the documented keys") {
  const auto post = parse_post(
      R"({"id":"1","text":"Get fit with the Jazz","hashtags":["JazzFit"],)"
      R"("links":["nba.com/jazz/get-fit-3"],"user":"UtahJazz","geo":"Utah, USA",)"
      R"("created_at":"2019-06-14T10:00:00Z"})");
  CHECK(post.id == "1");
  CHECK(post.text == "Get fit with the Jazz");
  CHECK(post.hashtags == std::vector<std::string>{"JazzFit"});
  CHECK(post.links == std::vector<std::string>{"nba.com/jazz/get-fit-3"});
  CHECK(post.user == "UtahJazz");
  CHECK(post.geo == "Utah, USA");
  CHECK(post.created_at == "2019-06-14T10:00:00Z");
}

TEST_CASE("parse_post defaults optional fields") {
  const auto post = parse_post(R"({"id":"x","text":"hello"})");
  CHECK(post.hashtags.empty());
  CHECK(post.links.empty());
  CHECK_FALSE(post.geo.has_value());
  CHECK(post.user.empty());
  CHECK(post.created_at.empty());
}

TEST_CASE("parse_post error contract") {
  CHECK(code_of("{not json") == ErrorCode::MalformedJson);
  CHECK(code_of("[1,2]") == ErrorCode::MalformedJson);
  CHECK(code_of(R"({"text":"no id"})") == ErrorCode::MissingField);
  CHECK(code_of(R"({"id":"1"})") == ErrorCode::MissingField);
  CHECK(code_of(R"({"id":"1","text":"   "})") == ErrorCode::EmptyText);
  CHECK(code_of(R"({"id":"","text":"a"})") == ErrorCode::MissingField);
  CHECK(code_of(R"({"id":"1","text":"a","hashtags":["a#b"]})") == ErrorCode::InvalidField);
  CHECK(code_of(R"({"id":"1","text":"a","created_at":"yesterday"})") ==
        ErrorCode::InvalidField);
  CHECK(code_of(R"({"id":"1","text":"a","created_at":"2019-02-30"})") ==
        ErrorCode::InvalidField);
}

TEST_CASE("parse_post strips a leading hash from hashtags") {
  const auto post = parse_post(R"({"id":"1","text":"a","hashtags":["#ausbudget"]})");
  CHECK(post.hashtags == std::vector<std::string>{"ausbudget"});
}

TEST_CASE("tweet export aliases") {
  const auto post = parse_post(
      R"({"id_str":"1138","full_text":"Healht insurers given all clear",)"
      R"("entities":{"hashtags":[{"text":"health"}],"urls":[{"expanded_url":"https://x.org/a"}]},)"
      R"("user":{"screen_name":"news"},"place":{"full_name":"Sydney, NSW"},)"
      R"("created_at":"Wed Oct 10 20:19:24 +0000 2018"})");
  CHECK(post.id == "1138");
  CHECK(post.text == "Healht insurers given all clear");
  CHECK(post.hashtags == std::vector<std::string>{"health"});
  CHECK(post.links == std::vector<std::string>{"https://x.org/a"});
  CHECK(post.user == "news");
  CHECK(post.geo == "Sydney, NSW");
  CHECK(post.created_at == "2018-10-10T20:19:24+00:00");
}

TEST_CASE("iso8601 validation") {
  CHECK(is_iso8601("2019-06-14"));
  CHECK(is_iso8601("2019-06-14T10:00:00Z"));
  CHECK(is_iso8601("2019-06-14T10:00:00.125+10:00"));
  CHECK(is_iso8601("2020-02-29T00:00:00Z"));
  CHECK_FALSE(is_iso8601("2019-02-29T00:00:00Z"));
  CHECK_FALSE(is_iso8601("2019-13-01"));
  CHECK_FALSE(is_iso8601("2019-06-14T25:00:00Z"));
  CHECK_FALSE(is_iso8601("14 June 2019"));
  CHECK(tweet_time_to_iso("Wed Oct 10 20:19:24 +0000 2018") == "2018-10-10T20:19:24+00:00");
  CHECK_FALSE(tweet_time_to_iso("Wed Foo 10 20:19:24 +0000 2018").has_value());
}

TEST_CASE("serialize keeps unknown keys and round-trips fields") {
  const std::string line =
      R"({"id":"7","text":"MRI and CT Scan","lang":"en","retweets":3,"geo":"Utah, USA"})";
  const auto post = parse_post(line);
  const std::string out = serialize_post(post);
  const auto j = nlohmann::json::parse(out);
  CHECK(j["lang"] == "en");
  CHECK(j["retweets"] == 3);
  CHECK(same_fields(parse_post(out), post));
}

TEST_CASE("property: parse after serialize is the identity on fields") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    RawPost post;
    post.id = "id" + std::to_string(i);
    post.text = testing::random_word(rng, 1, 12) + " " + testing::random_word(rng, 1, 8) +
                " \"quoted\" \xE2\x80\xA6";
    for (std::size_t k = 0; k < rng() % 3; ++k) post.hashtags.push_back(testing::random_word(rng, 1, 6));
    for (std::size_t k = 0; k < rng() % 2; ++k) post.links.push_back("https://e.org/" + testing::random_word(rng, 1, 5));
    post.user = testing::random_word(rng, 0, 6);
    if (rng() % 2) post.geo = "Place " + testing::random_word(rng, 1, 5);
    if (rng() % 2) post.created_at = "2019-06-14T10:00:00Z";
    const RawPost back = parse_post(serialize_post(post));
    CHECK(same_fields(back, post));
  }
}

TEST_CASE("ingest: unique posts, idempotence and duplicates") {
  TempDir dir;
  testing::write_text(dir / "in.jsonl",
                      R"({"id":"1","text":"a"})" "\n" R"({"id":"2","text":"b"})" "\n"
                      R"({"id":"3","text":"c"})" "\n");
  auto store = PostStore::open(dir / "store");
  auto first = ingest_file(dir / "in.jsonl", store);
  CHECK(first.read == 3);
  CHECK(first.accepted == 3);
  CHECK(first.duplicates == 0);
  const std::string after_first = testing::read_text(store.file());

  auto second = ingest_file(dir / "in.jsonl", store);
  CHECK(second.accepted == 0);
  CHECK(second.duplicates == 3);
  CHECK(testing::read_text(store.file()) == after_first);

  auto reopened = PostStore::open(dir / "store");
  CHECK(reopened.posts().size() == 3);
  CHECK(reopened.contains("2"));
  CHECK(reopened.find("3")->text == "c");
}

TEST_CASE("ingest: malformed line is rejected with a reason") {
  TempDir dir;
  testing::write_text(dir / "in.jsonl",
                      R"({"id":"1","text":"a"})" "\n" R"({"id":"2","text":"b"})" "\n"
                      "{broken\n" R"({"id":"3","text":"c"})" "\n\n"
                      R"({"id":"4","text":"d"})" "\n");
  auto store = PostStore::open(dir / "store");
  const auto stats = ingest_file(dir / "in.jsonl", store);
  CHECK(stats.read == 5);
  CHECK(stats.accepted == 4);
  CHECK(stats.rejected == 1);
  REQUIRE(stats.rejections.size() == 1);
  CHECK(stats.rejections[0].line == 3);
  CHECK(stats.rejections[0].reason.find("MALFORMED_JSON") == 0);
}

TEST_CASE("ingest: first write wins inside one file") {
  TempDir dir;
  testing::write_text(dir / "in.jsonl",
                      R"({"id":"1","text":"first"})" "\n" R"({"id":"1","text":"second"})" "\n");
  auto store = PostStore::open(dir / "store");
  const auto stats = ingest_file(dir / "in.jsonl", store);
  CHECK(stats.accepted == 1);
  CHECK(stats.duplicates == 1);
  CHECK(store.find("1")->text == "first");
}

TEST_CASE("ingest: missing input is an IoError") {
  TempDir dir;
  auto store = PostStore::open(dir / "store");
  CHECK_THROWS_AS(ingest_file(dir / "missing.jsonl", store), Error);
}

TEST_CASE("property: stats identity and store idempotence on random files") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 25; ++round) {
    TempDir dir;
    std::string content;
    for (int i = 0; i < 30; ++i) {
      switch (rng() % 5) {
        case 0: content += "{oops\n"; break;
        case 1: content += R"({"id":"e","text":""})" "\n"; break;
        default:
          content += R"({"id":")" + std::to_string(rng() % 12) + R"(","text":"t"})" "\n";
      }
    }
    testing::write_text(dir / "in.jsonl", content);
    auto store = PostStore::open(dir / "s");
    const auto a = ingest_file(dir / "in.jsonl", store);
    CHECK(a.read == a.accepted + a.duplicates + a.rejected);
    const std::string once = testing::read_text(store.file());
    const auto b = ingest_file(dir / "in.jsonl", store);
    CHECK(b.read == b.accepted + b.duplicates + b.rejected);
    CHECK(b.accepted == 0);
    CHECK(testing::read_text(store.file()) == once);
  }
}
