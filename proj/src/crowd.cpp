#include "crowdcorrect/crowd.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <memory>
#include <unordered_set>

namespace crowdcorrect {

using nlohmann::json;

namespace {

const std::vector<std::string> kSuggestionOptions = {"jargon", "abbreviation",
                                                     "misspelling", "none"};

std::string normalise_text(std::string_view text) { return casefold(trim(text)); }

std::string format_epoch(std::time_t seconds) {
  std::tm tm{};
  gmtime_r(&seconds, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::optional<TaskKind> parse_task_kind(std::string_view text) {
  for (auto kind : {TaskKind::identification, TaskKind::suggestion, TaskKind::correction}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::optional<TaskState> parse_task_state(std::string_view text) {
  for (auto state : {TaskState::open, TaskState::resolved, TaskState::exhausted}) {
    if (to_string(state) == text) return state;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::identification: return "identification";
    case TaskKind::suggestion: return "suggestion";
    case TaskKind::correction: return "correction";
  }
  return "identification";
}

std::string_view to_string(TaskState state) {
  switch (state) {
    case TaskState::open: return "open";
    case TaskState::resolved: return "resolved";
    case TaskState::exhausted: return "exhausted";
  }
  return "open";
}

std::string worker_id_for_email(std::string_view email) {
  char buffer[20];
  std::snprintf(buffer, sizeof buffer, "w%016llx",
                static_cast<unsigned long long>(fnv1a64(normalise_text(email))));
  return buffer;
}

std::string vote_key(const MicroTask& task, const Choice& choice) {
  if (const auto* index = std::get_if<std::size_t>(&choice)) {
    if (*index >= task.options.size()) {
      throw Error(ErrorCode::InvalidChoice,
                  "option " + std::to_string(*index) + " out of range for " + task.task_id);
    }
    return normalise_text(task.options[*index]);
  }
  const auto& text = std::get<std::string>(choice);
  if (!task.allows_free_text) {
    throw Error(ErrorCode::InvalidChoice, task.task_id + " does not accept free text");
  }
  std::string key = normalise_text(text);
  if (key.empty()) throw Error(ErrorCode::InvalidChoice, "empty free-text answer");
  return key;
}

AggregateResult aggregate(const MicroTask& task, std::span<const Answer> answers) {
  AggregateResult result;
  result.task_id = task.task_id;
  for (const auto& answer : answers) ++result.counts[vote_key(task, answer.choice)];
  result.answers = answers.size();
  result.quorum_met = result.answers >= task.quorum;

  std::size_t best = 0;
  std::size_t best_ties = 0;
  std::string best_key;
  for (const auto& [key, count] : result.counts) {
    if (count > best) {
      best = count;
      best_ties = 1;
      best_key = key;
    } else if (count == best) {
      ++best_ties;
    }
  }
  const bool unique = best > 0 && best_ties == 1;
  if (result.quorum_met && unique) {
    result.resolved = true;
    result.state = TaskState::resolved;
    result.winner = best_key;
    for (const auto& option : task.options) {
      if (normalise_text(option) == best_key) {
        result.winner = option;
        break;
      }
    }
  } else if (result.answers >= task.max_answers()) {
    result.state = TaskState::exhausted;
  }
  return result;
}

std::string identification_task_id(std::string_view post_id) {
  return "identify:" + std::string(post_id);
}
std::string suggestion_task_id(std::string_view feature_id) {
  return "suggest:" + std::string(feature_id);
}
std::string correction_task_id(std::string_view feature_id) {
  return "correct:" + std::string(feature_id);
}

std::vector<MicroTask> generate_identification_tasks(std::span<const RawPost> posts,
                                                     std::string_view category,
                                                     std::size_t quorum) {
  if (trim(category).empty()) {
    throw Error(ErrorCode::InvalidArgument, "category must be non-empty");
  }
  std::vector<MicroTask> tasks;
  tasks.reserve(posts.size());
  for (const auto& post : posts) {
    MicroTask task;
    task.task_id = identification_task_id(post.id);
    task.kind = TaskKind::identification;
    task.post_id = post.id;
    task.prompt = "Is this post related to the " + std::string(category) +
                  " category?\n\n" + post.text;
    task.options = {std::string(category), "other"};
    task.allows_free_text = false;
    task.quorum = quorum;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

MicroTask generate_suggestion_task(const FeatureRecord& feature, const RawPost& post,
                                   std::size_t quorum) {
  if (feature.status != FeatureStatus::needs_crowd) {
    throw Error(ErrorCode::PreconditionFailed,
                "suggestion task needs a needs_crowd feature: " + feature.feature_id);
  }
  MicroTask task;
  task.task_id = suggestion_task_id(feature.feature_id);
  task.kind = TaskKind::suggestion;
  task.post_id = post.id;
  task.feature_id = feature.feature_id;
  task.prompt = post.text + "\n\nKeyword: [[" + feature.surface +
                "]]\nIs the highlighted keyword a jargon term, an abbreviation, "
                "a misspelling, or none of these?";
  task.options = kSuggestionOptions;
  task.allows_free_text = false;
  task.quorum = quorum;
  return task;
}

MicroTask generate_correction_task(const FeatureRecord& feature, const RawPost& post,
                                   IssueClass resolved_issue,
                                   std::vector<Candidate> candidates,
                                   std::size_t quorum) {
  if (resolved_issue == IssueClass::none) {
    throw Error(ErrorCode::PreconditionFailed,
                "correction task needs an issue class: " + feature.feature_id);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  MicroTask task;
  task.task_id = correction_task_id(feature.feature_id);
  task.kind = TaskKind::correction;
  task.post_id = post.id;
  task.feature_id = feature.feature_id;
  task.issue = resolved_issue;
  task.allows_free_text = true;
  task.quorum = quorum;
  std::unordered_set<std::string> seen;
  for (const auto& candidate : candidates) {
    if (task.options.size() == 5) break;
    if (seen.insert(normalise_text(candidate.replacement)).second) {
      task.options.push_back(candidate.replacement);
    }
  }
  task.prompt = post.text + "\n\nKeyword: [[" + feature.surface + "]] (" +
                std::string(to_string(resolved_issue)) +
                ")\nPick the correct form, or type your own.";
  return task;
}

json to_json(const MicroTask& task) {
  json j = {{"task_id", task.task_id},
            {"kind", to_string(task.kind)},
            {"post_id", task.post_id},
            {"prompt", task.prompt},
            {"options", task.options},
            {"allows_free_text", task.allows_free_text},
            {"quorum", task.quorum},
            {"state", to_string(task.state)}};
  if (task.feature_id) j["feature_id"] = *task.feature_id;
  if (task.issue) j["issue"] = to_string(*task.issue);
  return j;
}

MicroTask task_from_json(const json& j) {
  MicroTask task;
  try {
    task.task_id = j.at("task_id").get<std::string>();
    const auto kind = parse_task_kind(j.at("kind").get<std::string>());
    const auto state = parse_task_state(j.value("state", "open"));
    if (!kind || !state) throw Error(ErrorCode::InvalidField, "bad task kind/state");
    task.kind = *kind;
    task.state = *state;
    task.post_id = j.at("post_id").get<std::string>();
    task.prompt = j.at("prompt").get<std::string>();
    task.options = j.at("options").get<std::vector<std::string>>();
    task.allows_free_text = j.at("allows_free_text").get<bool>();
    task.quorum = j.at("quorum").get<std::size_t>();
    if (j.contains("feature_id")) task.feature_id = j["feature_id"].get<std::string>();
    if (j.contains("issue")) {
      task.issue = parse_issue_class(j["issue"].get<std::string>());
      if (!task.issue) throw Error(ErrorCode::InvalidField, "bad task issue");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidField, std::string("bad task: ") + e.what());
  }
  if (task.quorum == 0) throw Error(ErrorCode::InvalidField, "quorum must be positive");
  return task;
}

json to_json(const Choice& choice) {
  if (const auto* index = std::get_if<std::size_t>(&choice)) return {{"option", *index}};
  return {{"text", std::get<std::string>(choice)}};
}

Choice choice_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidChoice, "choice must be an object");
  if (j.contains("option") && j.contains("text")) {
    throw Error(ErrorCode::InvalidChoice, "choice has both option and text");
  }
  if (j.contains("option")) {
    const auto& option = j["option"];
    if (!option.is_number_integer() || option.get<long long>() < 0) {
      throw Error(ErrorCode::InvalidChoice, "option must be a non-negative integer");
    }
    return static_cast<std::size_t>(option.get<long long>());
  }
  if (j.contains("text")) {
    if (!j["text"].is_string()) throw Error(ErrorCode::InvalidChoice, "text must be a string");
    return j["text"].get<std::string>();
  }
  throw Error(ErrorCode::InvalidChoice, "choice needs option or text");
}

json to_json(const AggregateResult& result) {
  json j = {{"task_id", result.task_id},
            {"counts", result.counts},
            {"answers", result.answers},
            {"quorum_met", result.quorum_met},
            {"resolved", result.resolved},
            {"state", to_string(result.state)}};
  j["winner"] = result.winner ? json(*result.winner) : json(nullptr);
  return j;
}

const TaskRecord* CrowdState::find(std::string_view task_id) const {
  auto it = tasks_.find(std::string(task_id));
  return it == tasks_.end() ? nullptr : &it->second;
}

std::size_t CrowdState::answers_on_post(std::string_view post_id) const {
  auto it = post_answers_.find(std::string(post_id));
  return it == post_answers_.end() ? 0 : it->second;
}

bool CrowdState::has_answered(std::string_view task_id, std::string_view worker_id) const {
  return answered_.contains({std::string(task_id), std::string(worker_id)});
}

void CrowdState::check_answer(const Answer& answer) const {
  const TaskRecord* record = find(answer.task_id);
  if (!record) throw Error(ErrorCode::UnknownTask, "unknown task " + answer.task_id);
  if (!workers_.contains(answer.worker_id)) {
    throw Error(ErrorCode::UnknownWorker, "unknown worker " + answer.worker_id);
  }
  if (has_answered(answer.task_id, answer.worker_id)) {
    throw Error(ErrorCode::DuplicateAnswer,
                answer.worker_id + " already answered " + answer.task_id);
  }
  if (record->task.state != TaskState::open) {
    throw Error(ErrorCode::TaskClosed, answer.task_id + " is " +
                                           std::string(to_string(record->task.state)));
  }
  vote_key(record->task, answer.choice);
}

void CrowdState::add_worker(WorkerProfile worker) {
  workers_.try_emplace(worker.worker_id, std::move(worker));
}

bool CrowdState::add_task(MicroTask task) {
  if (tasks_.contains(task.task_id)) return false;
  TaskRecord record;
  record.result = aggregate(task, {});
  record.task = std::move(task);
  record.task.state = record.result.state;
  tasks_.emplace(record.task.task_id, std::move(record));
  return true;
}

const AggregateResult& CrowdState::record_answer(Answer answer) {
  TaskRecord& record = tasks_.at(answer.task_id);
  answered_.insert({answer.task_id, answer.worker_id});
  ++post_answers_[record.task.post_id];
  record.answers.push_back(std::move(answer));
  record.result = aggregate(record.task, record.answers);
  record.task.state = record.result.state;
  return record.result;
}

void CrowdState::apply(const json& event) {
  if (!event.is_object() || !event.contains("event") || !event["event"].is_string()) {
    throw Error(ErrorCode::CorruptLog, "event without type");
  }
  const std::string type = event["event"].get<std::string>();
  try {
    if (type == "worker-registered") {
      add_worker({event.at("worker_id").get<std::string>(),
                  event.at("name").get<std::string>(),
                  event.at("email").get<std::string>()});
    } else if (type == "task-created") {
      MicroTask task = task_from_json(event.at("task"));
      task.state = TaskState::open;
      if (!add_task(std::move(task))) {
        throw Error(ErrorCode::CorruptLog, "task created twice");
      }
    } else if (type == "answer-recorded") {
      Answer answer{event.at("task_id").get<std::string>(),
                    event.at("worker_id").get<std::string>(),
                    choice_from_json(event.at("choice")),
                    event.value("received_at", "")};
      check_answer(answer);
      record_answer(std::move(answer));
    } else if (type == "task-resolved" || type == "task-exhausted") {
      const TaskRecord* record = find(event.at("task_id").get<std::string>());
      if (!record) throw Error(ErrorCode::CorruptLog, "close event for unknown task");
      const TaskState expected =
          type == "task-resolved" ? TaskState::resolved : TaskState::exhausted;
      if (record->task.state != expected) {
        throw Error(ErrorCode::CorruptLog, "close event disagrees with answers");
      }
      if (expected == TaskState::resolved && event.contains("winner") &&
          (!record->result.winner ||
           event["winner"].get<std::string>() != *record->result.winner)) {
        throw Error(ErrorCode::CorruptLog, "winner disagrees with answers");
      }
    } else {
      throw Error(ErrorCode::CorruptLog, "unknown event type " + type);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptLog, type + ": " + e.what());
  }
}

json CrowdState::to_json() const {
  json tasks = json::array();
  for (const auto& [id, record] : tasks_) {
    json answers = json::array();
    for (const auto& answer : record.answers) {
      answers.push_back({{"worker_id", answer.worker_id},
                         {"choice", crowdcorrect::to_json(answer.choice)},
                         {"received_at", answer.received_at}});
    }
    tasks.push_back({{"task", crowdcorrect::to_json(record.task)},
                     {"answers", answers},
                     {"result", crowdcorrect::to_json(record.result)}});
  }
  json workers = json::array();
  for (const auto& [id, worker] : workers_) {
    workers.push_back(
        {{"worker_id", worker.worker_id}, {"name", worker.name}, {"email", worker.email}});
  }
  return {{"tasks", tasks}, {"workers", workers}};
}

json worker_registered_event(const WorkerProfile& worker) {
  return {{"event", "worker-registered"},
          {"worker_id", worker.worker_id},
          {"name", worker.name},
          {"email", worker.email}};
}

json task_created_event(const MicroTask& task) {
  return {{"event", "task-created"}, {"task", to_json(task)}};
}

json answer_recorded_event(const Answer& answer) {
  return {{"event", "answer-recorded"},
          {"task_id", answer.task_id},
          {"worker_id", answer.worker_id},
          {"choice", to_json(answer.choice)},
          {"received_at", answer.received_at}};
}

json task_closed_event(const AggregateResult& result) {
  if (result.state == TaskState::resolved) {
    return {{"event", "task-resolved"},
            {"task_id", result.task_id},
            {"winner", result.winner.value_or("")}};
  }
  return {{"event", "task-exhausted"}, {"task_id", result.task_id}};
}

Progress progress_of(const CrowdState& state) {
  Progress progress;
  progress.tasks = state.tasks().size();
  progress.workers = state.workers().size();
  for (const auto& [id, record] : state.tasks()) {
    progress.answers += record.answers.size();
    switch (record.task.state) {
      case TaskState::open: ++progress.open; break;
      case TaskState::resolved: ++progress.resolved; break;
      case TaskState::exhausted: ++progress.exhausted; break;
    }
  }
  return progress;
}

std::string utc_now() {
  return format_epoch(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
}

CrowdStore::Clock logical_clock() {
  auto counter = std::make_shared<std::time_t>(0);
  return [counter] { return format_epoch((*counter)++); };
}

CrowdStore::CrowdStore(CrowdState state, EventSink* sink, Clock clock)
    : state_(std::move(state)), sink_(sink), clock_(clock ? std::move(clock) : Clock(utc_now)) {}

WorkerProfile CrowdStore::register_worker(std::string_view name, std::string_view email) {
  if (trim(email).empty()) throw Error(ErrorCode::InvalidArgument, "email must be non-empty");
  WorkerProfile worker{worker_id_for_email(email), std::string(trim(name)),
                       std::string(trim(email))};
  std::lock_guard lock(mutex_);
  if (auto it = state_.workers().find(worker.worker_id); it != state_.workers().end()) {
    return it->second;
  }
  if (sink_) sink_->write(worker_registered_event(worker));
  state_.add_worker(worker);
  return worker;
}

bool CrowdStore::add_task(MicroTask task) {
  std::lock_guard lock(mutex_);
  if (state_.find(task.task_id)) return false;
  task.state = TaskState::open;
  if (sink_) sink_->write(task_created_event(task));
  return state_.add_task(std::move(task));
}

std::size_t CrowdStore::add_tasks(std::span<const MicroTask> tasks) {
  std::size_t added = 0;
  for (const auto& task : tasks) added += add_task(task) ? 1 : 0;
  return added;
}

Batch CrowdStore::next_batch(std::string_view worker_id, std::size_t batch_size) const {
  std::lock_guard lock(mutex_);
  if (!state_.workers().contains(std::string(worker_id))) {
    throw Error(ErrorCode::UnknownWorker, "unknown worker " + std::string(worker_id));
  }
  struct Ranked {
    std::size_t answers;
    std::size_t post_answers;
    const TaskRecord* record;
  };
  std::vector<Ranked> ranked;
  for (const auto& [id, record] : state_.tasks()) {
    if (record.task.state != TaskState::open) continue;
    if (state_.has_answered(id, worker_id)) continue;
    ranked.push_back({record.answers.size(), state_.answers_on_post(record.task.post_id),
                      &record});
  }
  const std::size_t take = std::min(batch_size, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), [](const Ranked& a, const Ranked& b) {
                      if (a.answers != b.answers) return a.answers < b.answers;
                      if (a.post_answers != b.post_answers) {
                        return a.post_answers < b.post_answers;
                      }
                      return a.record->task.task_id < b.record->task.task_id;
                    });
  Batch batch;
  for (std::size_t i = 0; i < take; ++i) batch.tasks.push_back(ranked[i].record->task);
  batch.no_tasks_available = batch.tasks.empty();
  return batch;
}

AggregateResult CrowdStore::submit_answer(Answer answer) {
  std::lock_guard lock(mutex_);
  state_.check_answer(answer);
  if (answer.received_at.empty()) answer.received_at = clock_();
  if (sink_) sink_->write(answer_recorded_event(answer));
  const AggregateResult result = state_.record_answer(std::move(answer));
  if (result.state != TaskState::open && sink_) sink_->write(task_closed_event(result));
  return result;
}

std::optional<TaskRecord> CrowdStore::task(std::string_view task_id) const {
  std::lock_guard lock(mutex_);
  const TaskRecord* record = state_.find(task_id);
  if (!record) return std::nullopt;
  return *record;
}

std::optional<WorkerProfile> CrowdStore::worker(std::string_view worker_id) const {
  std::lock_guard lock(mutex_);
  auto it = state_.workers().find(std::string(worker_id));
  if (it == state_.workers().end()) return std::nullopt;
  return it->second;
}

Progress CrowdStore::progress() const {
  std::lock_guard lock(mutex_);
  return progress_of(state_);
}

CrowdState CrowdStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::vector<MicroTask> plan_tasks(const std::vector<FeatureRecord>& features,
                                  const PostStore& posts, const CrowdState& state,
                                  const SourceSet& sources, std::size_t quorum) {
  std::vector<MicroTask> planned;
  for (const auto& feature : features) {
    if (feature.kind != FeatureKind::keyword ||
        feature.status != FeatureStatus::needs_crowd) {
      continue;
    }
    const RawPost* post = posts.find(feature.post_id);
    if (!post) continue;
    const std::string correction_id = correction_task_id(feature.feature_id);
    if (state.find(correction_id)) continue;

    std::optional<IssueClass> settled;
    if (feature.correction_only && feature.issue_class &&
        *feature.issue_class != IssueClass::none) {
      settled = feature.issue_class;
    } else {
      const std::string suggestion_id = suggestion_task_id(feature.feature_id);
      const TaskRecord* suggestion = state.find(suggestion_id);
      if (!suggestion) {
        planned.push_back(generate_suggestion_task(feature, *post, quorum));
        continue;
      }
      if (suggestion->task.state != TaskState::resolved || !suggestion->result.winner) {
        continue;
      }
      settled = parse_issue_class(*suggestion->result.winner);
      if (!settled || *settled == IssueClass::none) continue;
    }

    std::vector<Candidate> candidates;
    if (feature.issue_class == settled && !feature.candidates.empty()) {
      candidates = feature.candidates;
    } else {
      candidates = lookup_candidates(sources, *settled, feature.surface);
    }
    planned.push_back(
        generate_correction_task(feature, *post, *settled, std::move(candidates), quorum));
  }
  return planned;
}

CrowdOutcome apply_crowd_results(const CrowdState& state,
                                 std::vector<FeatureRecord>& features) {
  CrowdOutcome outcome;
  for (const auto& [id, record] : state.tasks()) {
    if (record.task.kind == TaskKind::identification &&
        record.task.state == TaskState::resolved && record.result.winner) {
      outcome.categories[record.task.post_id] = *record.result.winner;
    }
  }

  for (auto& feature : features) {
    if (feature.kind != FeatureKind::keyword ||
        feature.status != FeatureStatus::needs_crowd) {
      continue;
    }
    if (const TaskRecord* suggestion = state.find(suggestion_task_id(feature.feature_id))) {
      if (suggestion->task.state == TaskState::exhausted) {
        feature.status = FeatureStatus::unresolved;
        ++outcome.unresolved;
        continue;
      }
      if (suggestion->task.state == TaskState::resolved && suggestion->result.winner) {
        const auto issue = parse_issue_class(*suggestion->result.winner);
        if (issue == IssueClass::none) {
          feature.status = FeatureStatus::clean;
          feature.issue_class = IssueClass::none;
          feature.correction.reset();
          feature.provenance.reset();
          ++outcome.cleaned;
          continue;
        }
        if (issue) feature.issue_class = issue;
      }
    }
    const TaskRecord* correction = state.find(correction_task_id(feature.feature_id));
    if (!correction) continue;
    if (correction->task.state == TaskState::exhausted) {
      feature.status = FeatureStatus::unresolved;
      ++outcome.unresolved;
    } else if (correction->task.state == TaskState::resolved && correction->result.winner) {
      const IssueClass issue =
          correction->task.issue.value_or(feature.issue_class.value_or(IssueClass::misspelling));
      const std::string winner_key = casefold(trim(*correction->result.winner));
      const double share =
          static_cast<double>(correction->result.counts.at(winner_key)) /
          static_cast<double>(correction->result.answers);
      feature.issue_class = issue;
      feature.correction = correction_for(feature.surface, *correction->result.winner, issue);
      feature.provenance = Provenance{CorrectionMethod::crowd, "crowd", share};
      feature.status = FeatureStatus::crowd_corrected;
      ++outcome.crowd_corrected;
    }
  }
  return outcome;
}

}  // namespace crowdcorrect
