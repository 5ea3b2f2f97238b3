#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crowdcorrect/core.hpp"

namespace crowdcorrect {

/// An ingested social post. `raw` keeps the source JSON line verbatim.
struct RawPost {
  std::string id;
  std::string text;
  std::vector<std::string> hashtags;  // bodies, no '#'
  std::vector<std::string> links;
  std::string user;
  std::optional<std::string> geo;
  std::string created_at;  // ISO-8601, empty when the source had none
  std::string raw;
};

/// Field-wise equality ignoring `raw`.
bool same_fields(const RawPost& a, const RawPost& b);

/// Parses one JSON object into a RawPost.
///
/// Keys `id`, `text`, `hashtags`, `links`, `user`, `geo` and `created_at`
/// map directly. Tweet exports are accepted through the aliases `id_str`,
/// `full_text`, `entities.hashtags[].text`, `entities.urls[].expanded_url`,
/// `user.screen_name` and `place.full_name`; a tweet-style `created_at`
/// ("Wed Oct 10 20:19:24 +0000 2018") is normalised to ISO-8601.
///
/// Throws Error with MalformedJson, MissingField, EmptyText or InvalidField.
RawPost parse_post(std::string_view json_text);

/// Canonical single-line JSON: unknown keys from `raw` are carried over and
/// the known keys are rewritten from the struct.
std::string serialize_post(const RawPost& post);

bool is_iso8601(std::string_view text);

/// Converts "Www Mmm dd hh:mm:ss +zzzz yyyy" to ISO-8601; nullopt otherwise.
std::optional<std::string> tweet_time_to_iso(std::string_view text);

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct IngestStats {
  std::size_t read = 0;
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t rejected = 0;
  std::vector<Rejection> rejections;
};

/// Append-only `<dir>/posts.jsonl` with an in-memory id index rebuilt on
/// open. Single writer.
class PostStore {
 public:
  static PostStore open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file() const { return dir_ / "posts.jsonl"; }

  bool contains(std::string_view id) const;
  const RawPost* find(std::string_view id) const;
  const std::vector<RawPost>& posts() const { return posts_; }

  /// Appends all posts or none. On a write failure the file is truncated
  /// back to its previous length and IoError is thrown.
  void append(std::span<const RawPost> posts);

 private:
  explicit PostStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path dir_;
  std::vector<RawPost> posts_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Ingests one JSONL file; first write wins on duplicate ids (including
/// duplicates inside the same file). Blank lines are skipped.
IngestStats ingest_file(const std::filesystem::path& path, PostStore& store);

}  // namespace crowdcorrect
