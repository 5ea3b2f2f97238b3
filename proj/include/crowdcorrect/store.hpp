#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdcorrect/crowd.hpp"
#include "crowdcorrect/extract.hpp"
#include "crowdcorrect/ingest.hpp"

namespace crowdcorrect {

nlohmann::json to_json(const FeatureRecord& feature);
FeatureRecord feature_from_json(const nlohmann::json& j);

/// `<dir>/features.jsonl`, rewritten whole on save.
std::vector<FeatureRecord> load_features(const std::filesystem::path& dir);
void save_features(const std::filesystem::path& dir,
                   const std::vector<FeatureRecord>& features);

/// `<dir>/categories.tsv`: post_id<TAB>label, sorted by post id.
std::map<std::string, std::string> load_categories(const std::filesystem::path& dir);
void save_categories(const std::filesystem::path& dir,
                     const std::map<std::string, std::string>& categories);

/// Append-only JSONL event log; one writer at a time, enforced with an
/// advisory lock file next to the log (StoreLocked otherwise). Each event
/// is flushed before the mutation it describes is applied.
class EventLog final : public EventSink {
 public:
  explicit EventLog(const std::filesystem::path& path);
  ~EventLog() override;
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  void write(const nlohmann::json& event) override;
  void flush();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  int lock_fd_ = -1;
};

/// Rebuilds state by applying each event in order. Blank lines are
/// skipped; the first unparseable or inconsistent line raises
/// CorruptLogError naming it.
CrowdState replay(std::istream& log);
CrowdState replay_file(const std::filesystem::path& path);

inline std::filesystem::path task_log_path(const std::filesystem::path& dir) {
  return dir / "tasks.log";
}

/// A crowd store backed by `<dir>/tasks.log`: replays what is there, then
/// appends new events to it.
class TaskStore {
 public:
  explicit TaskStore(const std::filesystem::path& dir, CrowdStore::Clock clock = {});

  CrowdStore& crowd() { return *crowd_; }
  const CrowdStore& crowd() const { return *crowd_; }
  void flush() { log_->flush(); }

 private:
  std::unique_ptr<EventLog> log_;
  std::unique_ptr<CrowdStore> crowd_;
};

struct CorrectionEntry {
  std::string surface;
  std::string replacement;
  IssueClass issue_class = IssueClass::misspelling;
  CorrectionMethod method = CorrectionMethod::automatic;
  std::string source_id;
  double score = 0.0;
  Span span;

  bool operator==(const CorrectionEntry&) const = default;
};

struct CuratedPost {
  std::string post_id;
  std::string original_text;
  std::string curated_text;
  std::optional<std::string> category;
  std::vector<CorrectionEntry> corrections;  // span order

  bool operator==(const CuratedPost&) const = default;
};

struct SummaryRow {
  std::string post_id;
  std::size_t n_auto = 0;
  std::size_t n_crowd = 0;
  std::size_t n_unresolved = 0;
};

struct CuratedExport {
  std::vector<CuratedPost> posts;  // sorted by post_id
  std::vector<SummaryRow> summary;
};

/// One CuratedPost per stored post, features grouped by post id.
CuratedExport build_curated(const PostStore& posts,
                            const std::vector<FeatureRecord>& features,
                            const std::map<std::string, std::string>& categories);

nlohmann::json to_json(const CuratedPost& post);
CuratedPost curated_from_json(const nlohmann::json& j);

std::string curated_jsonl(const CuratedExport& data);
/// RFC 4180: CRLF line ends, fixed header post_id,n_auto,n_crowd,n_unresolved.
std::string summary_csv(const CuratedExport& data);

/// Writes `<dir>/curated.jsonl` and `<dir>/summary.csv`.
void export_curated(const std::filesystem::path& dir, const CuratedExport& data);

std::vector<CuratedPost> load_curated(const std::filesystem::path& file);

/// Quotes a CSV field when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view value);
/// Splits one CSV record (no embedded newlines) into fields.
std::vector<std::string> parse_csv_line(std::string_view line);

/// Reads a whole file; IoError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);
/// Writes atomically through a temporary file and rename.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace crowdcorrect
