#include "crowdcorrect/simcrowd.hpp"

#include "crowdcorrect/random.hpp"

namespace crowdcorrect {

WorkerModel WorkerModel::make(std::string worker_id, double accuracy, std::uint64_t seed) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "worker accuracy must be in [0, 1]");
  }
  WorkerModel model;
  model.rng.seed(derive_seed(seed, worker_id));
  model.worker_id = std::move(worker_id);
  model.accuracy = accuracy;
  model.rng_seed = seed;
  return model;
}

Answer simulate_answer(const MicroTask& task, const Choice& truth, WorkerModel& model) {
  const std::string truth_key = vote_key(task, truth);
  Answer answer;
  answer.task_id = task.task_id;
  answer.worker_id = model.worker_id;

  if (uniform01(model.rng) < model.accuracy) {
    answer.choice = truth;
    return answer;
  }
  std::vector<std::size_t> wrong;
  for (std::size_t i = 0; i < task.options.size(); ++i) {
    if (vote_key(task, Choice{i}) != truth_key) wrong.push_back(i);
  }
  if (!wrong.empty()) {
    answer.choice = wrong[uniform_index(model.rng, wrong.size())];
  } else if (task.allows_free_text && truth_key != kWrongFreeText) {
    answer.choice = std::string(kWrongFreeText);
  } else {
    // Nothing wrong can be said on this task.
    answer.choice = truth;
  }
  return answer;
}

bool winner_matches(const TaskRecord& record, const Choice& truth) {
  if (!record.result.winner) return false;
  return casefold(trim(*record.result.winner)) == vote_key(record.task, truth);
}

nlohmann::json SimulationResult::to_json() const {
  return {{"tasks", tasks},
          {"resolved", resolved},
          {"exhausted", exhausted},
          {"open", open},
          {"correct_winners", correct_winners},
          {"answers_spent", answers_spent},
          {"resolution_rate", resolution_rate},
          {"accuracy_of_winners", accuracy_of_winners}};
}

SimulationResult run_simulation(CrowdStore& store, const TruthFn& truth,
                                const SimulationConfig& config) {
  if (config.workers == 0) throw Error(ErrorCode::InvalidArgument, "need at least one worker");
  std::vector<WorkerModel> workers;
  for (std::size_t i = 1; i <= config.workers; ++i) {
    const std::string name = "sim-" + std::to_string(i);
    const WorkerProfile profile = store.register_worker(name, name + "@simcrowd.invalid");
    workers.push_back(WorkerModel::make(profile.worker_id, config.accuracy, config.seed));
  }

  SimulationResult result;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (auto& worker : workers) {
      const Batch batch = store.next_batch(worker.worker_id, config.batch_size);
      for (const MicroTask& task : batch.tasks) {
        const auto record = store.task(task.task_id);
        if (!record || record->task.state != TaskState::open) continue;
        const auto expected = truth(task);
        if (!expected) {
          throw Error(ErrorCode::PreconditionFailed, "no truth for task " + task.task_id);
        }
        store.submit_answer(simulate_answer(task, *expected, worker));
        ++result.answers_spent;
        progressed = true;
      }
    }
  }

  const CrowdState state = store.snapshot();
  for (const auto& [id, record] : state.tasks()) {
    ++result.tasks;
    switch (record.task.state) {
      case TaskState::open: ++result.open; break;
      case TaskState::exhausted: ++result.exhausted; break;
      case TaskState::resolved: {
        ++result.resolved;
        const auto expected = truth(record.task);
        if (expected && winner_matches(record, *expected)) ++result.correct_winners;
        break;
      }
    }
  }
  if (result.tasks > 0) {
    result.resolution_rate =
        static_cast<double>(result.resolved) / static_cast<double>(result.tasks);
  }
  if (result.resolved > 0) {
    result.accuracy_of_winners =
        static_cast<double>(result.correct_winners) / static_cast<double>(result.resolved);
  }
  return result;
}

}  // namespace crowdcorrect
