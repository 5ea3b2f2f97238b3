#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdcorrect/crowd.hpp"

namespace crowdcorrect {

/// A simulated worker. The RNG stream is a pure function of
/// (rng_seed, worker_id), so workers are independent and reproducible.
struct WorkerModel {
  std::string worker_id;
  double accuracy = 1.0;
  std::uint64_t rng_seed = 0;
  std::mt19937_64 rng;

  /// Throws InvalidArgument unless accuracy is in [0, 1].
  static WorkerModel make(std::string worker_id, double accuracy, std::uint64_t seed);
};

/// Wrong free text used when a task has no wrong option to pick.
inline constexpr std::string_view kWrongFreeText = "unknown";

/// With probability `accuracy` answers `truth`; otherwise picks uniformly
/// among the options whose vote key differs from the truth, falling back to
/// kWrongFreeText when there is none. Throws InvalidChoice if `truth` is not
/// a valid choice for the task.
Answer simulate_answer(const MicroTask& task, const Choice& truth, WorkerModel& model);

/// Ground truth per task; nullopt means the task has no known truth.
using TruthFn = std::function<std::optional<Choice>(const MicroTask&)>;

struct SimulationConfig {
  std::size_t workers = 10;
  double accuracy = 0.9;
  std::uint64_t seed = 42;
  std::size_t batch_size = kDefaultBatchSize;
};

struct SimulationResult {
  std::size_t tasks = 0;
  std::size_t resolved = 0;
  std::size_t exhausted = 0;
  std::size_t open = 0;
  std::size_t correct_winners = 0;
  std::size_t answers_spent = 0;
  double resolution_rate = 0.0;      // resolved / tasks
  double accuracy_of_winners = 0.0;  // correct / resolved

  nlohmann::json to_json() const;
};

/// Registers `workers` simulated workers (sim-1 ... sim-N) and lets them
/// take turns: each fetches a batch and answers it in order, until a full
/// round finds no task for anyone. Only tasks answered during this call
/// count as spent answers; the result describes every task in the store.
/// Throws PreconditionFailed for a task without truth.
SimulationResult run_simulation(CrowdStore& store, const TruthFn& truth,
                                const SimulationConfig& config);

/// "true" when the closed task's winner matches the truth's vote key.
bool winner_matches(const TaskRecord& record, const Choice& truth);

}  // namespace crowdcorrect
