#include "crowdcorrect/pipeline.hpp"

#include <unordered_map>

#include "crowdcorrect/random.hpp"
#include "crowdcorrect/store.hpp"

namespace crowdcorrect {

namespace {

std::optional<Choice> option_or_text(const MicroTask& task, const std::string& text) {
  const std::string key = casefold(trim(text));
  for (std::size_t i = 0; i < task.options.size(); ++i) {
    if (casefold(trim(task.options[i])) == key) return Choice{i};
  }
  if (task.allows_free_text) return Choice{text};
  return std::nullopt;
}

}  // namespace

nlohmann::json BenchmarkResult::to_json() const {
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [issue, tally] : by_class) {
    classes[std::string(to_string(issue))] = {{"injected", tally.injected},
                                              {"resolved", tally.resolved}};
  }
  nlohmann::json out = {
      {"posts", posts},
      {"features", features},
      {"autocorrect",
       {{"clean", autocorrect.clean},
        {"auto_corrected", autocorrect.auto_corrected},
        {"needs_crowd", autocorrect.needs_crowd},
        {"degraded", autocorrect.degraded}}},
      {"crowd",
       {{"rounds", crowd_rounds},
        {"tasks", crowd_tasks},
        {"answers_spent", answers_spent},
        {"crowd_corrected", crowd_corrected},
        {"unresolved", unresolved}}},
      {"corruptions",
       {{"injected", corruptions},
        {"resolved", resolved},
        {"resolution_rate", resolution_rate},
        {"by_class", classes}}},
  };
  if (eval) out["eval"] = eval->to_json();
  return out;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  namespace fs = std::filesystem;
  config.autocorrect.validate();
  const fs::path input = config.work_dir / "input";
  const fs::path store_dir = config.work_dir / "store";
  const fs::path features_dir = config.work_dir / "features";
  const fs::path tasks_dir = config.work_dir / "tasks";
  const fs::path out_dir = config.work_dir / "out";
  for (const auto& dir : {input, store_dir, features_dir, tasks_dir, out_dir}) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }

  const SynthCorpus corpus = generate_corpus(config.synth);
  write_corpus(input, corpus);

  PostStore posts = PostStore::open(store_dir);
  const IngestStats stats = ingest_file(input / "posts.jsonl", posts);
  if (stats.rejected > 0) {
    throw Error(ErrorCode::InvalidField, "synthetic corpus has rejected posts");
  }

  BenchmarkResult result;
  result.posts = posts.posts().size();

  std::vector<FeatureRecord> features;
  const ExtractOptions options;
  for (const auto& post : posts.posts()) {
    auto extracted = extract_all(post, options);
    features.insert(features.end(), std::make_move_iterator(extracted.begin()),
                    std::make_move_iterator(extracted.end()));
  }
  result.features = features.size();

  const Lexicons lexicons = Lexicons::load(input / "lexicons");
  const SourceSet sources = SourceSet::from_lexicons(lexicons);
  result.autocorrect =
      auto_correct_corpus(features, sources, lexicons.dictionary.get(), config.autocorrect);

  std::map<std::string, int> labels;
  for (const auto& post : corpus.posts) labels[post.id] = post.label;

  std::unordered_map<std::string, const FeatureRecord*> by_id;
  auto truth = [&](const MicroTask& task) -> std::optional<Choice> {
    switch (task.kind) {
      case TaskKind::identification:
        return Choice{std::size_t{labels.at(task.post_id) == 1 ? 0u : 1u}};
      case TaskKind::suggestion:
      case TaskKind::correction: {
        if (!task.feature_id) return std::nullopt;
        const auto it = by_id.find(*task.feature_id);
        if (it == by_id.end() || !it->second->span) return std::nullopt;
        const FeatureRecord& feature = *it->second;
        const Corruption* corruption = corpus.find(feature.post_id, *feature.span);
        if (task.kind == TaskKind::suggestion) {
          const IssueClass issue = corruption ? corruption->issue : IssueClass::none;
          return option_or_text(task, std::string(to_string(issue)));
        }
        return option_or_text(task, corruption ? corruption->truth : feature.surface);
      }
    }
    return std::nullopt;
  };

  {
    TaskStore tasks(tasks_dir, logical_clock());
    CrowdStore& crowd = tasks.crowd();
    crowd.add_tasks(generate_identification_tasks(posts.posts(), config.category, config.quorum));
    CrowdOutcome outcome;
    while (true) {
      const auto planned = plan_tasks(features, posts, crowd.snapshot(), sources, config.quorum);
      if (result.crowd_rounds > 0 && planned.empty()) break;
      crowd.add_tasks(planned);

      by_id.clear();
      for (const auto& feature : features) by_id.emplace(feature.feature_id, &feature);
      SimulationConfig round = config.crowd;
      round.seed = derive_seed(config.crowd.seed, "round-" + std::to_string(result.crowd_rounds));
      result.answers_spent += run_simulation(crowd, truth, round).answers_spent;
      ++result.crowd_rounds;

      auto applied = apply_crowd_results(crowd.snapshot(), features);
      outcome.crowd_corrected += applied.crowd_corrected;
      outcome.unresolved += applied.unresolved;
      outcome.categories = std::move(applied.categories);
    }
    tasks.flush();
    result.crowd_tasks = crowd.progress().tasks;
    result.crowd_corrected = outcome.crowd_corrected;
    result.unresolved = outcome.unresolved;

    save_features(features_dir, features);
    save_categories(features_dir, outcome.categories);
    const CuratedExport curated = build_curated(posts, features, outcome.categories);
    export_curated(out_dir, curated);

    if (config.evaluate) {
      std::map<std::string, std::string> curated_text;
      for (const auto& post : curated.posts) curated_text[post.post_id] = post.curated_text;
      std::vector<std::string> raw_texts, curated_texts;
      std::vector<int> label_list;
      for (const auto& post : corpus.posts) {
        raw_texts.push_back(post.text);
        curated_texts.push_back(curated_text.at(post.id));
        label_list.push_back(post.label);
      }
      result.eval = compare(raw_texts, curated_texts, label_list, config.hyper);
    }
  }

  std::map<std::pair<std::string, Span>, const FeatureRecord*> keyword_at;
  for (const auto& feature : features) {
    if (feature.kind == FeatureKind::keyword && feature.span) {
      keyword_at[{feature.post_id, *feature.span}] = &feature;
    }
  }
  for (const auto& c : corpus.corruptions) {
    ClassTally& tally = result.by_class[c.issue];
    ++tally.injected;
    ++result.corruptions;
    const auto it = keyword_at.find({c.post_id, c.span});
    if (it == keyword_at.end()) continue;
    const FeatureRecord& feature = *it->second;
    if (is_corrected(feature) && casefold(*feature.correction) == casefold(c.truth)) {
      ++tally.resolved;
      ++result.resolved;
    }
  }
  if (result.corruptions > 0) {
    result.resolution_rate =
        static_cast<double>(result.resolved) / static_cast<double>(result.corruptions);
  }

  write_file(out_dir / "report.json", result.to_json().dump(2) + "\n");
  return result;
}

}  // namespace crowdcorrect
