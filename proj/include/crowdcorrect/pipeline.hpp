#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdcorrect/autocorrect.hpp"
#include "crowdcorrect/eval.hpp"
#include "crowdcorrect/simcrowd.hpp"
#include "crowdcorrect/synth.hpp"

namespace crowdcorrect {

/// End-to-end run over a synthetic corpus: generate, ingest, extract,
/// auto-correct, simulated crowd rounds, export and evaluation.
struct BenchmarkConfig {
  std::filesystem::path work_dir;
  SynthConfig synth;
  AutoCorrectConfig autocorrect;
  SimulationConfig crowd;
  std::size_t quorum = kDefaultQuorum;
  std::string category = "health";
  Hyper hyper;
  bool evaluate = true;
};

struct ClassTally {
  std::size_t injected = 0;
  std::size_t resolved = 0;  // corrected to the ground-truth word
};

struct BenchmarkResult {
  std::size_t posts = 0;
  std::size_t features = 0;
  AutoCorrectSummary autocorrect;
  std::size_t crowd_rounds = 0;
  std::size_t crowd_tasks = 0;
  std::size_t answers_spent = 0;
  std::size_t crowd_corrected = 0;
  std::size_t unresolved = 0;
  std::map<IssueClass, ClassTally> by_class;
  std::size_t corruptions = 0;
  std::size_t resolved = 0;
  double resolution_rate = 0.0;
  std::optional<EvalReport> eval;

  /// Deterministic summary; no timings or paths.
  nlohmann::json to_json() const;
};

/// Layout under work_dir: input/ (posts.jsonl, labels.csv, truth.csv,
/// lexicons/), store/, features/, tasks/ and out/ (curated.jsonl,
/// summary.csv, report.json). Those subdirectories are recreated.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

}  // namespace crowdcorrect
