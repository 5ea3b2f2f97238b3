// Command-line front end for the curation pipeline.
//
// Exit codes: 0 success, 1 ingest finished with rejected records,
// 2 any other error (message on stderr as "error: CODE: message").

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "crowdcorrect/autocorrect.hpp"
#include "crowdcorrect/crowd.hpp"
#include "crowdcorrect/eval.hpp"
#include "crowdcorrect/extract.hpp"
#include "crowdcorrect/ingest.hpp"
#include "crowdcorrect/knowledge.hpp"
#include "crowdcorrect/pipeline.hpp"
#include "crowdcorrect/service.hpp"
#include "crowdcorrect/simcrowd.hpp"
#include "crowdcorrect/store.hpp"
#include "crowdcorrect/synth.hpp"

namespace fs = std::filesystem;
using namespace crowdcorrect;
using nlohmann::json;

namespace {

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// task_id,kind,value with kind "option" (value = index) or "text".
std::map<std::string, Choice> load_truth(const fs::path& file) {
  std::istringstream in(read_file(file));
  std::map<std::string, Choice> truth;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = parse_csv_line(line);
    if (number == 1 && !fields.empty() && fields[0] == "task_id") continue;
    if (fields.size() != 3 || (fields[1] != "option" && fields[1] != "text")) {
      throw Error(ErrorCode::InvalidField,
                  "truth line " + std::to_string(number) + ": expected task_id,option|text,value");
    }
    if (fields[1] == "option") {
      std::size_t index = 0;
      try {
        index = std::stoul(fields[2]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidField, "truth line " + std::to_string(number) +
                                                 ": option must be an index");
      }
      truth[fields[0]] = index;
    } else {
      truth[fields[0]] = fields[2];
    }
  }
  return truth;
}

std::map<std::string, RawPost> read_posts_jsonl(const fs::path& file) {
  std::istringstream in(read_file(file));
  std::map<std::string, RawPost> posts;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    RawPost post = parse_post(line);
    posts.emplace(post.id, std::move(post));
  }
  return posts;
}

std::function<void()> g_stop;

void on_signal(int) {
  if (g_stop) g_stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdcorrect: noisy post curation with a crowd in the loop"};
  app.require_subcommand(1);

  // ingest
  fs::path ingest_in, ingest_store;
  auto* ingest = app.add_subcommand("ingest", "Validate and store posts from a JSONL file");
  ingest->add_option("--in", ingest_in, "Input JSONL")->required();
  ingest->add_option("--store", ingest_store, "Post store directory")->required();

  // extract
  fs::path extract_store, extract_features, extract_stopwords, extract_gazetteer;
  auto* extract = app.add_subcommand("extract", "Extract features from stored posts");
  extract->add_option("--store", extract_store, "Post store directory")->required();
  extract->add_option("--features", extract_features, "Feature directory")->required();
  extract->add_option("--stopwords", extract_stopwords, "Stopword file, one per line");
  extract->add_option("--gazetteer", extract_gazetteer, "Entity names, one per line");

  // autocorrect
  fs::path ac_features, ac_lexicons;
  AutoCorrectConfig ac_config;
  auto* autocorrect = app.add_subcommand("autocorrect", "Automatic correction pass");
  autocorrect->add_option("--features", ac_features, "Feature directory")->required();
  autocorrect->add_option("--lexicons", ac_lexicons, "Lexicon directory")->required();
  autocorrect->add_option("--threshold", ac_config.accept_threshold, "Minimum top score");
  autocorrect->add_option("--margin", ac_config.accept_margin, "Minimum top-second gap");

  // tasks
  auto* tasks = app.add_subcommand("tasks", "Crowd task store");
  tasks->require_subcommand(1);
  fs::path tg_store, tg_features, tg_tasks, tg_lexicons;
  std::size_t tg_quorum = kDefaultQuorum;
  std::string tg_category;
  auto* tgen = tasks->add_subcommand("generate", "Create the tasks the features call for");
  tgen->add_option("--store", tg_store, "Post store directory")->required();
  tgen->add_option("--features", tg_features, "Feature directory")->required();
  tgen->add_option("--tasks", tg_tasks, "Task store directory")->required();
  tgen->add_option("--lexicons", tg_lexicons, "Lexicon directory")->required();
  tgen->add_option("--quorum", tg_quorum, "Answers needed per task")->check(CLI::PositiveNumber);
  tgen->add_option("--category", tg_category, "Also create identification tasks");
  fs::path ts_tasks;
  auto* tstatus = tasks->add_subcommand("status", "Progress totals");
  tstatus->add_option("--tasks", ts_tasks, "Task store directory")->required();
  fs::path ta_tasks, ta_features;
  auto* tapply = tasks->add_subcommand("apply", "Fold closed tasks into the features");
  tapply->add_option("--tasks", ta_tasks, "Task store directory")->required();
  tapply->add_option("--features", ta_features, "Feature directory")->required();

  // simulate
  fs::path sim_tasks, sim_truth;
  SimulationConfig sim_config;
  std::optional<std::size_t> sim_quorum;
  auto* simulate = app.add_subcommand("simulate", "Answer open tasks with simulated workers");
  simulate->add_option("--tasks", sim_tasks, "Task store directory")->required();
  simulate->add_option("--truth", sim_truth, "CSV task_id,option|text,value")->required();
  simulate->add_option("--workers", sim_config.workers, "Number of workers")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--accuracy", sim_config.accuracy, "Worker accuracy p")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--quorum", sim_quorum, "Expected task quorum");
  simulate->add_option("--seed", sim_config.seed, "RNG seed");

  // export
  fs::path ex_store, ex_features, ex_out;
  auto* exporter = app.add_subcommand("export", "Write curated.jsonl and summary.csv");
  exporter->add_option("--store", ex_store, "Post store directory")->required();
  exporter->add_option("--features", ex_features, "Feature directory")->required();
  exporter->add_option("--out", ex_out, "Output directory")->required();

  // eval
  fs::path ev_raw, ev_curated, ev_labels, ev_out;
  Hyper ev_hyper;
  auto* evaluate = app.add_subcommand("eval", "Raw vs curated classifier comparison");
  evaluate->add_option("--raw", ev_raw, "Raw posts JSONL")->required();
  evaluate->add_option("--curated", ev_curated, "curated.jsonl")->required();
  evaluate->add_option("--labels", ev_labels, "CSV post_id,label")->required();
  evaluate->add_option("--out", ev_out, "Report JSON path")->required();
  evaluate->add_option("--lr", ev_hyper.learning_rate, "Learning rate");
  evaluate->add_option("--epochs", ev_hyper.epochs, "Epochs");
  evaluate->add_option("--seed", ev_hyper.seed, "Split and shuffle seed");

  // serve
  int sv_port = 8080;
  std::string sv_host = "127.0.0.1";
  fs::path sv_store;
  auto* serve = app.add_subcommand("serve", "HTTP API over a task store");
  serve->add_option("--port", sv_port, "Port (0 = any free port)");
  serve->add_option("--host", sv_host, "Bind address");
  serve->add_option("--store", sv_store, "Task store directory")->envname("CROWDCORRECT_STORE");

  // synth
  fs::path sy_out;
  SynthConfig sy_config;
  auto* synth = app.add_subcommand("synth", "Write a synthetic noisy corpus");
  synth->add_option("--out", sy_out, "Output directory")->required();
  synth->add_option("--posts", sy_config.posts, "Number of posts");
  synth->add_option("--seed", sy_config.seed, "RNG seed");

  // bench
  BenchmarkConfig bn_config;
  std::uint64_t bn_seed = 42;
  auto* bench = app.add_subcommand("bench", "Synthetic end-to-end benchmark");
  bench->add_option("--work", bn_config.work_dir, "Working directory")->required();
  bench->add_option("--seed", bn_seed, "Seed for corpus, crowd and split");
  bench->add_option("--posts", bn_config.synth.posts, "Number of posts");
  bench->add_option("--workers", bn_config.crowd.workers, "Simulated workers");
  bench->add_option("--accuracy", bn_config.crowd.accuracy, "Worker accuracy p")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--quorum", bn_config.quorum, "Answers needed per task")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      PostStore store = PostStore::open(ingest_store);
      const IngestStats stats = ingest_file(ingest_in, store);
      json rejections = json::array();
      for (const auto& r : stats.rejections) {
        rejections.push_back({{"line", r.line}, {"reason", r.reason}});
      }
      print({{"read", stats.read},
             {"accepted", stats.accepted},
             {"duplicates", stats.duplicates},
             {"rejected", stats.rejected},
             {"rejections", rejections}});
      return stats.rejected == 0 ? 0 : 1;
    }

    if (*extract) {
      const PostStore store = PostStore::open(extract_store);
      ExtractOptions options;
      if (!extract_stopwords.empty()) options.stopwords = load_word_set(extract_stopwords);
      if (!extract_gazetteer.empty()) options.gazetteer = load_word_set(extract_gazetteer);
      std::vector<FeatureRecord> features;
      for (const auto& post : store.posts()) {
        auto extracted = extract_all(post, options);
        features.insert(features.end(), extracted.begin(), extracted.end());
      }
      save_features(extract_features, features);
      print({{"posts", store.posts().size()}, {"features", features.size()}});
      return 0;
    }

    if (*autocorrect) {
      ac_config.validate();
      auto features = load_features(ac_features);
      const Lexicons lexicons = Lexicons::load(ac_lexicons);
      const auto summary =
          auto_correct_corpus(features, SourceSet::from_lexicons(lexicons),
                              lexicons.dictionary.get(), ac_config);
      save_features(ac_features, features);
      print({{"clean", summary.clean},
             {"auto_corrected", summary.auto_corrected},
             {"needs_crowd", summary.needs_crowd},
             {"degraded", summary.degraded}});
      return 0;
    }

    if (*tgen) {
      const PostStore store = PostStore::open(tg_store);
      const auto features = load_features(tg_features);
      const Lexicons lexicons = Lexicons::load(tg_lexicons);
      TaskStore task_store(tg_tasks);
      std::vector<MicroTask> planned;
      if (!tg_category.empty()) {
        planned = generate_identification_tasks(store.posts(), tg_category, tg_quorum);
      }
      auto more = plan_tasks(features, store, task_store.crowd().snapshot(),
                             SourceSet::from_lexicons(lexicons), tg_quorum);
      planned.insert(planned.end(), more.begin(), more.end());
      const std::size_t added = task_store.crowd().add_tasks(planned);
      print({{"planned", planned.size()}, {"added", added}});
      return 0;
    }

    if (*tstatus) {
      print(to_json(progress_of(replay_file(task_log_path(ts_tasks)))));
      return 0;
    }

    if (*tapply) {
      auto features = load_features(ta_features);
      const auto outcome = apply_crowd_results(replay_file(task_log_path(ta_tasks)), features);
      save_features(ta_features, features);
      auto categories = load_categories(ta_features);
      for (const auto& [post, label] : outcome.categories) categories[post] = label;
      save_categories(ta_features, categories);
      print({{"crowd_corrected", outcome.crowd_corrected},
             {"cleaned", outcome.cleaned},
             {"unresolved", outcome.unresolved},
             {"categories", outcome.categories.size()}});
      return 0;
    }

    if (*simulate) {
      const auto truth = load_truth(sim_truth);
      TaskStore task_store(sim_tasks, logical_clock());
      if (sim_quorum) {
        const CrowdState state = task_store.crowd().snapshot();
        for (const auto& [id, record] : state.tasks()) {
          if (record.task.quorum != *sim_quorum) {
            throw Error(ErrorCode::InvalidArgument,
                        "task " + id + " has quorum " + std::to_string(record.task.quorum));
          }
        }
      }
      const auto result = run_simulation(
          task_store.crowd(),
          [&](const MicroTask& task) -> std::optional<Choice> {
            if (auto it = truth.find(task.task_id); it != truth.end()) return it->second;
            return std::nullopt;
          },
          sim_config);
      print(result.to_json());
      return 0;
    }

    if (*exporter) {
      const PostStore store = PostStore::open(ex_store);
      const auto curated =
          build_curated(store, load_features(ex_features), load_categories(ex_features));
      export_curated(ex_out, curated);
      print({{"posts", curated.posts.size()}});
      return 0;
    }

    if (*evaluate) {
      const auto raw = read_posts_jsonl(ev_raw);
      const auto curated = load_curated(ev_curated);
      const auto labels = load_labels(ev_labels);
      std::vector<std::string> raw_texts, curated_texts;
      std::vector<int> label_list;
      for (const auto& post : curated) {
        const auto r = raw.find(post.post_id);
        const auto l = labels.find(post.post_id);
        if (r == raw.end() || l == labels.end()) {
          throw Error(ErrorCode::InvalidArgument, "post " + post.post_id +
                                                      " lacks a raw record or a label");
        }
        raw_texts.push_back(r->second.text);
        curated_texts.push_back(post.curated_text);
        label_list.push_back(l->second);
      }
      const EvalReport report = compare(raw_texts, curated_texts, label_list, ev_hyper);
      write_file(ev_out, report.to_json().dump(2) + "\n");
      print(report.to_json()["deltas"]);
      return 0;
    }

    if (*serve) {
      if (sv_store.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--store or CROWDCORRECT_STORE is required");
      }
      TaskStore task_store(sv_store);
      Service service(task_store.crowd());
      const int port = service.bind(sv_host, sv_port);
      g_stop = [&service] { service.stop(); };
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << sv_host << ":" << port << "\n";
      service.run();
      task_store.flush();
      std::cerr << "stopped\n";
      return 0;
    }

    if (*synth) {
      const SynthCorpus corpus = generate_corpus(sy_config);
      write_corpus(sy_out, corpus);
      print({{"posts", corpus.posts.size()},
             {"word_tokens", corpus.word_tokens},
             {"corruptions", corpus.corruptions.size()}});
      return 0;
    }

    if (*bench) {
      bn_config.synth.seed = bn_seed;
      bn_config.crowd.seed = bn_seed;
      bn_config.hyper.seed = bn_seed;
      const auto start = std::chrono::steady_clock::now();
      const BenchmarkResult result = run_benchmark(bn_config);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      print(result.to_json());
      std::cerr << "elapsed " << seconds << " s\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
