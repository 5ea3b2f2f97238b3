#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "crowdcorrect/autocorrect.hpp"
#include "crowdcorrect/extract.hpp"
#include "crowdcorrect/ingest.hpp"
#include "crowdcorrect/knowledge.hpp"

namespace crowdcorrect {

enum class TaskKind { identification, suggestion, correction };
enum class TaskState { open, resolved, exhausted };

std::string_view to_string(TaskKind kind);
std::string_view to_string(TaskState state);

inline constexpr std::size_t kDefaultQuorum = 3;
// A tied task keeps collecting answers until quorum + kTieExtension.
inline constexpr std::size_t kTieExtension = 4;
inline constexpr std::size_t kDefaultBatchSize = 10;

struct MicroTask {
  std::string task_id;
  TaskKind kind = TaskKind::identification;
  std::string post_id;
  std::optional<std::string> feature_id;  // absent for identification
  std::string prompt;                     // always contains the post text
  std::vector<std::string> options;
  bool allows_free_text = false;
  std::size_t quorum = kDefaultQuorum;
  TaskState state = TaskState::open;
  std::optional<IssueClass> issue;  // correction tasks: the settled class

  std::size_t max_answers() const { return quorum + kTieExtension; }
  bool operator==(const MicroTask&) const = default;
};

/// Option index or free text.
using Choice = std::variant<std::size_t, std::string>;

struct Answer {
  std::string task_id;
  std::string worker_id;
  Choice choice;
  std::string received_at;

  bool operator==(const Answer&) const = default;
};

struct AggregateResult {
  std::string task_id;
  std::optional<std::string> winner;
  std::map<std::string, std::size_t> counts;  // normalised choice -> votes
  std::size_t answers = 0;
  bool quorum_met = false;
  bool resolved = false;
  TaskState state = TaskState::open;

  bool operator==(const AggregateResult&) const = default;
};

struct WorkerProfile {
  std::string worker_id;
  std::string name;
  std::string email;

  bool operator==(const WorkerProfile&) const = default;
};

/// "w" + 16 hex digits of FNV-1a over the trimmed, case-folded email.
std::string worker_id_for_email(std::string_view email);

/// Vote key: free text is trimmed and case-folded; an option index maps to
/// its option text, normalised the same way, so typed and clicked answers
/// pool together. Throws InvalidChoice for an out-of-range index or free
/// text on a task that does not allow it.
std::string vote_key(const MicroTask& task, const Choice& choice);

/// Counts normalised votes. Resolved iff at least `quorum` answers and a
/// unique maximum; otherwise exhausted once `max_answers()` answers are in
/// without a unique maximum; otherwise open. The winner reports the
/// option's original text when the key matches an option.
AggregateResult aggregate(const MicroTask& task, std::span<const Answer> answers);

std::vector<MicroTask> generate_identification_tasks(
    std::span<const RawPost> posts, std::string_view category,
    std::size_t quorum = kDefaultQuorum);

/// Throws PreconditionFailed unless the feature is needs_crowd.
MicroTask generate_suggestion_task(const FeatureRecord& feature,
                                   const RawPost& post,
                                   std::size_t quorum = kDefaultQuorum);

/// Options are the first five distinct replacements in score order; free
/// text is always allowed. Throws PreconditionFailed for IssueClass::none.
MicroTask generate_correction_task(const FeatureRecord& feature,
                                   const RawPost& post, IssueClass resolved_issue,
                                   std::vector<Candidate> candidates,
                                   std::size_t quorum = kDefaultQuorum);

std::string identification_task_id(std::string_view post_id);
std::string suggestion_task_id(std::string_view feature_id);
std::string correction_task_id(std::string_view feature_id);

nlohmann::json to_json(const MicroTask& task);
MicroTask task_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Choice& choice);
Choice choice_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AggregateResult& result);

struct TaskRecord {
  MicroTask task;
  std::vector<Answer> answers;
  AggregateResult result;
};

/// Task/answer state reconstructed from events. Plain data; not
/// thread-safe on its own.
class CrowdState {
 public:
  const std::map<std::string, TaskRecord>& tasks() const { return tasks_; }
  const std::map<std::string, WorkerProfile>& workers() const { return workers_; }
  const TaskRecord* find(std::string_view task_id) const;
  std::size_t answers_on_post(std::string_view post_id) const;
  bool has_answered(std::string_view task_id, std::string_view worker_id) const;

  /// Validates without mutating; throws the error submit would raise.
  void check_answer(const Answer& answer) const;

  void add_worker(WorkerProfile worker);
  /// Returns false when a task with this id already exists.
  bool add_task(MicroTask task);
  /// Records a validated answer and re-aggregates.
  const AggregateResult& record_answer(Answer answer);

  /// Applies one event object; throws Error on an inconsistent event.
  void apply(const nlohmann::json& event);

  /// Canonical dump for equality checks.
  nlohmann::json to_json() const;

 private:
  std::map<std::string, TaskRecord> tasks_;
  std::map<std::string, WorkerProfile> workers_;
  std::map<std::string, std::size_t> post_answers_;
  std::set<std::pair<std::string, std::string>> answered_;
};

// Event constructors; the log holds one of these per line.
nlohmann::json worker_registered_event(const WorkerProfile& worker);
nlohmann::json task_created_event(const MicroTask& task);
nlohmann::json answer_recorded_event(const Answer& answer);
nlohmann::json task_closed_event(const AggregateResult& result);

/// Receives every event before it is applied. Throwing aborts the mutation.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void write(const nlohmann::json& event) = 0;
};

struct Batch {
  std::vector<MicroTask> tasks;
  bool no_tasks_available = false;
};

struct Progress {
  std::size_t tasks = 0;
  std::size_t open = 0;
  std::size_t resolved = 0;
  std::size_t exhausted = 0;
  std::size_t answers = 0;
  std::size_t workers = 0;

  bool operator==(const Progress&) const = default;
};

Progress progress_of(const CrowdState& state);

/// Serialised single-writer front end over CrowdState. Every mutation is
/// logged to the sink, applied and re-aggregated under one lock.
class CrowdStore {
 public:
  using Clock = std::function<std::string()>;

  explicit CrowdStore(CrowdState state = {}, EventSink* sink = nullptr,
                      Clock clock = {});

  WorkerProfile register_worker(std::string_view name, std::string_view email);
  bool add_task(MicroTask task);
  std::size_t add_tasks(std::span<const MicroTask> tasks);

  /// Up to `batch_size` open tasks the worker has not answered, ordered by
  /// (answers on the task, answers on its post, task_id). Throws
  /// UnknownWorker.
  Batch next_batch(std::string_view worker_id,
                   std::size_t batch_size = kDefaultBatchSize) const;

  /// Throws UnknownTask, UnknownWorker, TaskClosed, DuplicateAnswer or
  /// InvalidChoice. `received_at` is stamped by the clock when empty.
  AggregateResult submit_answer(Answer answer);

  std::optional<TaskRecord> task(std::string_view task_id) const;
  std::optional<WorkerProfile> worker(std::string_view worker_id) const;
  Progress progress() const;
  CrowdState snapshot() const;

 private:
  mutable std::mutex mutex_;
  CrowdState state_;
  EventSink* sink_;
  Clock clock_;
};

/// UTC wall clock, ISO-8601 with a trailing 'Z'.
std::string utc_now();

/// Deterministic clock for simulations: one second per call from the epoch.
CrowdStore::Clock logical_clock();

/// Creates the crowd tasks the current feature state calls for:
/// a suggestion task for every needs_crowd keyword, and a correction task
/// once its suggestion resolved to a real issue (or straight away for
/// correction_only features). Correction options come from the sources for
/// the settled class. Existing task ids are skipped.
std::vector<MicroTask> plan_tasks(const std::vector<FeatureRecord>& features,
                                  const PostStore& posts, const CrowdState& state,
                                  const SourceSet& sources,
                                  std::size_t quorum = kDefaultQuorum);

struct CrowdOutcome {
  std::size_t crowd_corrected = 0;
  std::size_t cleaned = 0;
  std::size_t unresolved = 0;
  std::map<std::string, std::string> categories;  // post_id -> label
};

/// Folds resolved and exhausted tasks back into the features:
/// suggestion "none" cleans the feature, any other suggestion settles the
/// issue class, a correction winner becomes a crowd correction, and an
/// exhausted suggestion or correction marks the feature unresolved.
/// Identification winners become post category labels.
CrowdOutcome apply_crowd_results(const CrowdState& state,
                                 std::vector<FeatureRecord>& features);

}  // namespace crowdcorrect
