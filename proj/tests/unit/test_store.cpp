#include <doctest.h>

#include <random>
#include <sstream>

#include "crowdcorrect/store.hpp"
#include "support.hpp"

using namespace crowdcorrect;

namespace {

CrowdStore::Clock fixed_clock() {
  return [] { return std::string("2019-01-01T00:00:00Z"); };
}

MicroTask binary_task(std::string id, std::size_t quorum = 2) {
  MicroTask task;
  task.task_id = std::move(id);
  task.post_id = "p1";
  task.prompt = "Is this post related to the health category?";
  task.options = {"health", "other"};
  task.quorum = quorum;
  return task;
}

FeatureRecord corrected(std::string post_id, std::string surface, std::size_t start,
                        std::string replacement, CorrectionMethod method) {
  FeatureRecord f;
  f.post_id = std::move(post_id);
  f.surface = std::move(surface);
  f.span = Span{start, start + f.surface.size()};
  f.feature_id = make_feature_id(f.post_id, FeatureKind::keyword, f.span);
  f.status = method == CorrectionMethod::crowd ? FeatureStatus::crowd_corrected
                                               : FeatureStatus::auto_corrected;
  f.issue_class = IssueClass::misspelling;
  f.correction = std::move(replacement);
  f.provenance = Provenance{method, method == CorrectionMethod::crowd ? "crowd" : "spell", 0.9};
  return f;
}

}  // namespace

TEST_CASE("replay of an empty log") {
  std::istringstream empty("");
  const CrowdState state = replay(empty);
  CHECK(state.tasks().empty());
  CHECK(state.workers().empty());
  std::istringstream blanks("\n\n");
  CHECK(replay(blanks).tasks().empty());
}

TEST_CASE("task store persists and replays") {
  testing::TempDir dir;
  nlohmann::json before;
  {
    TaskStore store(dir.path(), fixed_clock());
    auto& crowd = store.crowd();
    const auto w1 = crowd.register_worker("a", "a@x").worker_id;
    const auto w2 = crowd.register_worker("b", "b@x").worker_id;
    crowd.add_task(binary_task("t1"));
    crowd.add_task(binary_task("t2"));
    crowd.submit_answer({"t1", w1, std::size_t{0}, ""});
    crowd.submit_answer({"t1", w2, std::size_t{0}, ""});
    crowd.submit_answer({"t2", w1, std::size_t{1}, ""});
    before = crowd.snapshot().to_json();
  }
  const CrowdState once = replay_file(task_log_path(dir.path()));
  const CrowdState twice = replay_file(task_log_path(dir.path()));
  CHECK(once.to_json() == before);
  CHECK(twice.to_json() == before);
  CHECK(once.find("t1")->task.state == TaskState::resolved);
  CHECK(once.find("t2")->task.state == TaskState::open);

  {
    TaskStore reopened(dir.path(), fixed_clock());
    CHECK(reopened.crowd().snapshot().to_json() == before);
    const auto w3 = reopened.crowd().register_worker("c", "c@x").worker_id;
    reopened.crowd().submit_answer({"t2", w3, std::size_t{1}, ""});
  }
  CHECK(replay_file(task_log_path(dir.path())).find("t2")->task.state == TaskState::resolved);
}

TEST_CASE("a truncated last line is reported with its line number") {
  testing::TempDir dir;
  {
    TaskStore store(dir.path(), fixed_clock());
    store.crowd().register_worker("a", "a@x");
    store.crowd().add_task(binary_task("t1"));
  }
  std::string log = testing::read_text(task_log_path(dir.path()));
  REQUIRE(std::count(log.begin(), log.end(), '\n') == 2);
  log += R"({"type":"task-created","task":{"task_id")";
  testing::write_text(task_log_path(dir.path()), log);
  try {
    replay_file(task_log_path(dir.path()));
    FAIL("expected CorruptLogError");
  } catch (const CorruptLogError& e) {
    CHECK(e.code() == ErrorCode::CorruptLog);
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }

  std::istringstream unknown_task(
      R"({"type":"answer-recorded","answer":{"task_id":"nope","worker_id":"w","choice":0,"received_at":""}})"
      "\n");
  CHECK_THROWS_AS(replay(unknown_task), CorruptLogError);
}

TEST_CASE("a second writer is refused") {
  testing::TempDir dir;
  TaskStore first(dir.path(), fixed_clock());
  try {
    TaskStore second(dir.path(), fixed_clock());
    FAIL("expected StoreLocked");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StoreLocked);
  }
}

TEST_CASE("feature records round trip") {
  FeatureRecord f = corrected("p1", "Healht", 0, "Health", CorrectionMethod::automatic);
  f.candidates = {{"health", 0.85, "spell"}};
  CHECK(feature_from_json(to_json(f)) == f);

  FeatureRecord geo;
  geo.post_id = "p1";
  geo.kind = FeatureKind::location;
  geo.surface = "Utah, USA";
  geo.feature_id = make_feature_id("p1", geo.kind, std::nullopt);
  CHECK(feature_from_json(to_json(geo)) == geo);

  testing::TempDir dir;
  save_features(dir.path(), {f, geo});
  CHECK(load_features(dir.path()) == std::vector<FeatureRecord>{f, geo});
  save_categories(dir.path(), {{"p2", "other"}, {"p1", "health"}});
  CHECK(load_categories(dir.path()) ==
        std::map<std::string, std::string>{{"p1", "health"}, {"p2", "other"}});
  CHECK(testing::read_text(dir / "categories.tsv") == "p1\thealth\np2\tother\n");
}

TEST_CASE("curated export") {
  testing::TempDir dir;
  PostStore posts = PostStore::open(dir / "store");
  RawPost a;
  a.id = "p2";
  a.text = "Healht insurers, \"given\" all clear";
  RawPost b;
  b.id = "p1";
  b.text = "Hosp. are short";
  posts.append(std::vector<RawPost>{a, b});

  FeatureRecord unresolved;
  unresolved.post_id = "p1";
  unresolved.surface = "short";
  unresolved.span = Span{10, 15};
  unresolved.feature_id = make_feature_id("p1", FeatureKind::keyword, unresolved.span);
  unresolved.status = FeatureStatus::unresolved;

  const std::vector<FeatureRecord> features = {
      corrected("p2", "Healht", 0, "Health", CorrectionMethod::automatic),
      corrected("p1", "Hosp.", 0, "Hospital", CorrectionMethod::crowd), unresolved};
  const CuratedExport data = build_curated(posts, features, {{"p1", "health"}});
  REQUIRE(data.posts.size() == 2);
  CHECK(data.posts[0].post_id == "p1");
  CHECK(data.posts[0].curated_text == "Hospital are short");
  CHECK(data.posts[0].category == "health");
  CHECK(data.posts[1].curated_text == "Health insurers, \"given\" all clear");
  CHECK_FALSE(data.posts[1].category.has_value());
  REQUIRE(data.posts[1].corrections.size() == 1);
  CHECK(data.posts[1].corrections[0].replacement == "Health");
  CHECK(data.posts[1].corrections[0].method == CorrectionMethod::automatic);

  CHECK(summary_csv(data) ==
        "post_id,n_auto,n_crowd,n_unresolved\r\np1,0,1,1\r\np2,1,0,0\r\n");

  export_curated(dir / "out", data);
  const auto loaded = load_curated(dir / "out" / "curated.jsonl");
  CHECK(loaded == data.posts);
  const std::string first = testing::read_text(dir / "out" / "curated.jsonl");
  export_curated(dir / "out", CuratedExport{loaded, data.summary});
  CHECK(testing::read_text(dir / "out" / "curated.jsonl") == first);
  CHECK(testing::read_text(dir / "out" / "summary.csv") == summary_csv(data));
}

TEST_CASE("csv helpers") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(parse_csv_line("a,\"b,c\",\"d\"\"e\",") ==
        std::vector<std::string>{"a", "b,c", "d\"e", ""});

  std::mt19937_64 rng(29);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::string> fields;
    for (std::size_t k = 0; k < 1 + rng() % 5; ++k) {
      fields.push_back(testing::random_word(rng, 0, 6, "ab,\" "));
    }
    std::string line;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      line += (k ? "," : "") + csv_field(fields[k]);
    }
    CHECK(parse_csv_line(line) == fields);
  }
}

TEST_CASE("file helpers") {
  testing::TempDir dir;
  write_file(dir / "x.txt", "hello\n");
  CHECK(read_file(dir / "x.txt") == "hello\n");
  try {
    read_file(dir / "missing.txt");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
