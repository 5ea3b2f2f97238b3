#include "crowdcorrect/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <sstream>

#include "crowdcorrect/autocorrect.hpp"

namespace crowdcorrect {

using nlohmann::json;

namespace {

json candidate_json(const Candidate& c) {
  return {{"replacement", c.replacement}, {"score", c.score}, {"source_id", c.source_id}};
}

template <typename T, typename Parse>
T parse_enum(const json& j, const char* key, Parse parse) {
  const auto value = parse(j.at(key).get<std::string>());
  if (!value) throw Error(ErrorCode::InvalidField, std::string("bad value for ") + key);
  return *value;
}

}  // namespace

json to_json(const FeatureRecord& f) {
  json j = {{"feature_id", f.feature_id},
            {"post_id", f.post_id},
            {"kind", to_string(f.kind)},
            {"surface", f.surface},
            {"status", to_string(f.status)}};
  j["span"] = f.span ? json::array({f.span->start, f.span->end}) : json(nullptr);
  if (f.issue_class) j["issue_class"] = to_string(*f.issue_class);
  if (f.correction) j["correction"] = *f.correction;
  if (f.provenance) {
    j["provenance"] = {{"method", to_string(f.provenance->method)},
                       {"source_id", f.provenance->source_id},
                       {"score", f.provenance->score}};
  }
  if (!f.candidates.empty()) {
    json list = json::array();
    for (const auto& c : f.candidates) list.push_back(candidate_json(c));
    j["candidates"] = list;
  }
  if (f.correction_only) j["correction_only"] = true;
  return j;
}

FeatureRecord feature_from_json(const json& j) {
  FeatureRecord f;
  try {
    f.feature_id = j.at("feature_id").get<std::string>();
    f.post_id = j.at("post_id").get<std::string>();
    f.kind = parse_enum<FeatureKind>(j, "kind", parse_feature_kind);
    f.surface = j.at("surface").get<std::string>();
    f.status = parse_enum<FeatureStatus>(j, "status", parse_feature_status);
    if (j.contains("span") && !j["span"].is_null()) {
      const auto& span = j["span"];
      f.span = Span{span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
    }
    if (j.contains("issue_class")) {
      f.issue_class = parse_enum<IssueClass>(j, "issue_class", parse_issue_class);
    }
    if (j.contains("correction")) f.correction = j["correction"].get<std::string>();
    if (j.contains("provenance")) {
      const auto& p = j["provenance"];
      f.provenance = Provenance{parse_enum<CorrectionMethod>(p, "method", parse_correction_method),
                                p.at("source_id").get<std::string>(),
                                p.at("score").get<double>()};
    }
    if (j.contains("candidates")) {
      for (const auto& c : j["candidates"]) {
        f.candidates.push_back({c.at("replacement").get<std::string>(),
                                c.at("score").get<double>(),
                                c.value("source_id", "")});
      }
    }
    f.correction_only = j.value("correction_only", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidField, std::string("bad feature record: ") + e.what());
  }
  return f;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto temporary = path;
  temporary += ".tmp";
  {
    std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + temporary.string());
  }
  std::filesystem::rename(temporary, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot replace " + path.string());
}

std::vector<FeatureRecord> load_features(const std::filesystem::path& dir) {
  std::ifstream in(dir / "features.jsonl");
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + (dir / "features.jsonl").string());
  std::vector<FeatureRecord> features;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      features.push_back(feature_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::IoError, "features.jsonl line " + std::to_string(number) +
                                          ": " + e.what());
    }
  }
  return features;
}

void save_features(const std::filesystem::path& dir,
                   const std::vector<FeatureRecord>& features) {
  std::string content;
  for (const auto& feature : features) {
    content += to_json(feature).dump();
    content += '\n';
  }
  write_file(dir / "features.jsonl", content);
}

std::map<std::string, std::string> load_categories(const std::filesystem::path& dir) {
  std::map<std::string, std::string> categories;
  std::ifstream in(dir / "categories.tsv");
  if (!in) return categories;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    categories[line.substr(0, tab)] = std::string(trim(line.substr(tab + 1)));
  }
  return categories;
}

void save_categories(const std::filesystem::path& dir,
                     const std::map<std::string, std::string>& categories) {
  std::string content;
  for (const auto& [post, label] : categories) content += post + "\t" + label + "\n";
  write_file(dir / "categories.tsv", content);
}

EventLog::EventLog(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto lock_path = path;
  lock_path += ".lock";
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (lock_fd_ < 0) throw Error(ErrorCode::IoError, "cannot open " + lock_path.string());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorCode::StoreLocked, path.string() + " is held by another writer");
  }
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw Error(ErrorCode::IoError, "cannot append to " + path.string());
  }
}

EventLog::~EventLog() {
  out_.flush();
  out_.close();
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void EventLog::write(const json& event) {
  out_ << event.dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::IoError, "event log write failed: " + path_.string());
}

void EventLog::flush() { out_.flush(); }

CrowdState replay(std::istream& log) {
  CrowdState state;
  std::string line;
  std::size_t number = 0;
  while (std::getline(log, line)) {
    ++number;
    if (trim(line).empty()) continue;
    json event;
    try {
      event = json::parse(line);
    } catch (const json::parse_error& e) {
      throw CorruptLogError(number, e.what());
    }
    try {
      state.apply(event);
    } catch (const CorruptLogError&) {
      throw;
    } catch (const Error& e) {
      throw CorruptLogError(number, e.what());
    }
  }
  return state;
}

CrowdState replay_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return replay(in);
}

TaskStore::TaskStore(const std::filesystem::path& dir, CrowdStore::Clock clock) {
  const auto path = task_log_path(dir);
  log_ = std::make_unique<EventLog>(path);
  crowd_ = std::make_unique<CrowdStore>(replay_file(path), log_.get(), std::move(clock));
}

CuratedExport build_curated(const PostStore& posts,
                            const std::vector<FeatureRecord>& features,
                            const std::map<std::string, std::string>& categories) {
  std::map<std::string, std::vector<const FeatureRecord*>> by_post;
  for (const auto& feature : features) by_post[feature.post_id].push_back(&feature);

  std::vector<const RawPost*> ordered;
  for (const auto& post : posts.posts()) ordered.push_back(&post);
  std::sort(ordered.begin(), ordered.end(),
            [](const RawPost* a, const RawPost* b) { return a->id < b->id; });

  CuratedExport data;
  for (const RawPost* post : ordered) {
    CuratedPost curated;
    curated.post_id = post->id;
    curated.original_text = post->text;
    if (auto it = categories.find(post->id); it != categories.end()) {
      curated.category = it->second;
    }
    SummaryRow row{post->id, 0, 0, 0};
    std::vector<FeatureRecord> mine;
    for (const FeatureRecord* feature : by_post[post->id]) {
      mine.push_back(*feature);
      if (feature->kind != FeatureKind::keyword) continue;
      if (feature->status == FeatureStatus::unresolved) ++row.n_unresolved;
      if (!is_corrected(*feature)) continue;
      const Span span = *feature->span;
      CorrectionEntry entry;
      entry.surface = feature->surface;
      const std::string_view original =
          std::string_view(post->text).substr(span.start, span.length());
      entry.replacement = starts_with_upper(original) ? capitalize_first(*feature->correction)
                                                      : lowercase_first(*feature->correction);
      entry.issue_class = feature->issue_class.value_or(IssueClass::misspelling);
      entry.method = feature->provenance ? feature->provenance->method
                                         : (feature->status == FeatureStatus::crowd_corrected
                                                ? CorrectionMethod::crowd
                                                : CorrectionMethod::automatic);
      entry.source_id = feature->provenance ? feature->provenance->source_id : "";
      entry.score = feature->provenance ? feature->provenance->score : 0.0;
      entry.span = span;
      if (entry.method == CorrectionMethod::automatic) {
        ++row.n_auto;
      } else {
        ++row.n_crowd;
      }
      curated.corrections.push_back(std::move(entry));
    }
    std::sort(curated.corrections.begin(), curated.corrections.end(),
              [](const CorrectionEntry& a, const CorrectionEntry& b) { return a.span < b.span; });
    curated.curated_text = apply_corrections(*post, mine);
    data.posts.push_back(std::move(curated));
    data.summary.push_back(row);
  }
  return data;
}

json to_json(const CuratedPost& post) {
  json corrections = json::array();
  for (const auto& c : post.corrections) {
    corrections.push_back({{"surface", c.surface},
                           {"replacement", c.replacement},
                           {"issue_class", to_string(c.issue_class)},
                           {"method", to_string(c.method)},
                           {"source_id", c.source_id},
                           {"score", c.score},
                           {"span", {c.span.start, c.span.end}}});
  }
  json j = {{"post_id", post.post_id},
            {"original_text", post.original_text},
            {"curated_text", post.curated_text},
            {"corrections", corrections}};
  j["category"] = post.category ? json(*post.category) : json(nullptr);
  return j;
}

CuratedPost curated_from_json(const json& j) {
  CuratedPost post;
  try {
    post.post_id = j.at("post_id").get<std::string>();
    post.original_text = j.at("original_text").get<std::string>();
    post.curated_text = j.at("curated_text").get<std::string>();
    if (j.contains("category") && !j["category"].is_null()) {
      post.category = j["category"].get<std::string>();
    }
    for (const auto& c : j.at("corrections")) {
      CorrectionEntry entry;
      entry.surface = c.at("surface").get<std::string>();
      entry.replacement = c.at("replacement").get<std::string>();
      entry.issue_class = parse_enum<IssueClass>(c, "issue_class", parse_issue_class);
      entry.method = parse_enum<CorrectionMethod>(c, "method", parse_correction_method);
      entry.source_id = c.at("source_id").get<std::string>();
      entry.score = c.at("score").get<double>();
      entry.span = Span{c.at("span").at(0).get<std::size_t>(),
                        c.at("span").at(1).get<std::size_t>()};
      post.corrections.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidField, std::string("bad curated record: ") + e.what());
  }
  return post;
}

std::string curated_jsonl(const CuratedExport& data) {
  std::string out;
  for (const auto& post : data.posts) {
    out += to_json(post).dump();
    out += '\n';
  }
  return out;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> parse_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string summary_csv(const CuratedExport& data) {
  std::string out = "post_id,n_auto,n_crowd,n_unresolved\r\n";
  for (const auto& row : data.summary) {
    out += csv_field(row.post_id) + "," + std::to_string(row.n_auto) + "," +
           std::to_string(row.n_crowd) + "," + std::to_string(row.n_unresolved) + "\r\n";
  }
  return out;
}

void export_curated(const std::filesystem::path& dir, const CuratedExport& data) {
  write_file(dir / "curated.jsonl", curated_jsonl(data));
  write_file(dir / "summary.csv", summary_csv(data));
}

std::vector<CuratedPost> load_curated(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::vector<CuratedPost> posts;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      posts.push_back(curated_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedJson, file.string() + ": " + e.what());
    }
  }
  return posts;
}

}  // namespace crowdcorrect
