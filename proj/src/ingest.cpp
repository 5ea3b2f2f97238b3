#include "crowdcorrect/ingest.hpp"

#include <cstdio>
#include <array>
#include <charconv>
#include <fstream>
#include <regex>
#include <unordered_set>

#include <json.hpp>

namespace crowdcorrect {

using nlohmann::json;

namespace {

const json* member(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string id_value(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number_unsigned()) {
    return std::to_string(value.get<unsigned long long>());
  }
  throw Error(ErrorCode::InvalidField, "id must be a string or integer");
}

std::vector<std::string> string_list(const json& value, const char* field) {
  if (!value.is_array()) {
    throw Error(ErrorCode::InvalidField, std::string(field) + " must be a list");
  }
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw Error(ErrorCode::InvalidField,
                  std::string(field) + " entries must be strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

// entities.<name>[].<key>, for tweet exports.
std::vector<std::string> entity_list(const json& object, const char* name,
                                     std::initializer_list<const char*> keys) {
  std::vector<std::string> out;
  const json* entities = member(object, "entities");
  if (!entities || !entities->is_object()) return out;
  const json* list = member(*entities, name);
  if (!list || !list->is_array()) return out;
  for (const auto& item : *list) {
    if (!item.is_object()) continue;
    for (const char* key : keys) {
      const json* v = member(item, key);
      if (v && v->is_string()) {
        out.push_back(v->get<std::string>());
        break;
      }
    }
  }
  return out;
}

int parse_int(std::string_view digits) {
  int value = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), value);
  return value;
}

bool leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  return m == 2 && leap_year(y) ? 29 : kDays[static_cast<std::size_t>(m - 1)];
}

constexpr std::array<const char*, 12> kMonthAbbrev = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

}  // namespace

bool same_fields(const RawPost& a, const RawPost& b) {
  return a.id == b.id && a.text == b.text && a.hashtags == b.hashtags &&
         a.links == b.links && a.user == b.user && a.geo == b.geo &&
         a.created_at == b.created_at;
}

bool is_iso8601(std::string_view text) {
  static const std::regex kPattern(
      R"(^(\d{4})-(\d{2})-(\d{2})(?:[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(text.begin(), text.end(), m, kPattern)) return false;
  auto group = [&](int i) {
    return std::string_view(&*m[i].first, static_cast<std::size_t>(m[i].length()));
  };
  const int year = parse_int(group(1));
  const int month = parse_int(group(2));
  const int day = parse_int(group(3));
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
    return false;
  }
  if (m[4].matched && (parse_int(group(4)) > 23 || parse_int(group(5)) > 59)) {
    return false;
  }
  if (m[6].matched && parse_int(group(6)) > 60) return false;
  return true;
}

std::optional<std::string> tweet_time_to_iso(std::string_view text) {
  static const std::regex kPattern(
      R"(^[A-Z][a-z]{2} ([A-Z][a-z]{2}) (\d{2}) (\d{2}:\d{2}:\d{2}) ([+-])(\d{2})(\d{2}) (\d{4})$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(text.begin(), text.end(), m, kPattern)) {
    return std::nullopt;
  }
  const std::string month_name = m[1].str();
  int month = 0;
  for (std::size_t i = 0; i < kMonthAbbrev.size(); ++i) {
    if (month_name == kMonthAbbrev[i]) month = static_cast<int>(i) + 1;
  }
  if (month == 0) return std::nullopt;
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%02d", month);
  std::string iso = m[7].str() + "-" + buffer + "-" + m[2].str() + "T" +
                    m[3].str() + m[4].str() + m[5].str() + ":" + m[6].str();
  if (!is_iso8601(iso)) return std::nullopt;
  return iso;
}

RawPost parse_post(std::string_view json_text) {
  json object;
  try {
    object = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  if (!object.is_object()) {
    throw Error(ErrorCode::MalformedJson, "record is not a JSON object");
  }

  RawPost post;
  post.raw = std::string(trim(json_text));

  const json* id = member(object, "id");
  if (!id) id = member(object, "id_str");
  if (!id) throw Error(ErrorCode::MissingField, "missing field: id");
  post.id = id_value(*id);
  if (post.id.empty()) throw Error(ErrorCode::MissingField, "empty id");

  const json* text = member(object, "text");
  if (!text) text = member(object, "full_text");
  if (!text) throw Error(ErrorCode::MissingField, "missing field: text");
  if (!text->is_string()) {
    throw Error(ErrorCode::InvalidField, "text must be a string");
  }
  post.text = text->get<std::string>();
  if (trim(post.text).empty()) throw Error(ErrorCode::EmptyText, "empty text");

  if (const json* tags = member(object, "hashtags")) {
    post.hashtags = string_list(*tags, "hashtags");
  } else {
    post.hashtags = entity_list(object, "hashtags", {"text"});
  }
  for (auto& tag : post.hashtags) {
    if (!tag.empty() && tag.front() == '#') tag.erase(0, 1);
    if (tag.find('#') != std::string::npos) {
      throw Error(ErrorCode::InvalidField, "hashtag contains '#': " + tag);
    }
  }

  if (const json* links = member(object, "links")) {
    post.links = string_list(*links, "links");
  } else {
    post.links = entity_list(object, "urls", {"expanded_url", "url"});
  }

  if (const json* user = member(object, "user")) {
    if (user->is_string()) {
      post.user = user->get<std::string>();
    } else if (user->is_object()) {
      const json* handle = member(*user, "screen_name");
      if (handle && handle->is_string()) post.user = handle->get<std::string>();
    } else {
      throw Error(ErrorCode::InvalidField, "user must be a string or object");
    }
  }

  if (const json* geo = member(object, "geo"); geo && geo->is_string()) {
    post.geo = geo->get<std::string>();
  } else if (const json* place = member(object, "place");
             place && place->is_object()) {
    const json* name = member(*place, "full_name");
    if (name && name->is_string()) post.geo = name->get<std::string>();
  }

  if (const json* created = member(object, "created_at")) {
    if (!created->is_string()) {
      throw Error(ErrorCode::InvalidField, "created_at must be a string");
    }
    const std::string value = created->get<std::string>();
    if (is_iso8601(value)) {
      post.created_at = value;
    } else if (auto iso = tweet_time_to_iso(value)) {
      post.created_at = *iso;
    } else {
      throw Error(ErrorCode::InvalidField, "created_at is not ISO-8601: " + value);
    }
  }
  return post;
}

std::string serialize_post(const RawPost& post) {
  json object = json::object();
  if (!post.raw.empty()) {
    try {
      json original = json::parse(post.raw);
      if (original.is_object()) object = std::move(original);
    } catch (const json::parse_error&) {
    }
  }
  object["id"] = post.id;
  object["text"] = post.text;
  object["hashtags"] = post.hashtags;
  object["links"] = post.links;
  object["user"] = post.user;
  if (post.geo) {
    object["geo"] = *post.geo;
  } else {
    object.erase("geo");
  }
  if (!post.created_at.empty()) {
    object["created_at"] = post.created_at;
  } else {
    object.erase("created_at");
  }
  return object.dump();
}

PostStore PostStore::open(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());

  PostStore store(dir);
  std::ifstream in(store.file());
  if (!in) return store;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    RawPost post;
    try {
      post = parse_post(line);
    } catch (const Error& e) {
      throw Error(ErrorCode::IoError, store.file().string() + " line " +
                                          std::to_string(number) + ": " +
                                          e.what());
    }
    if (store.index_.contains(post.id)) continue;
    store.index_.emplace(post.id, store.posts_.size());
    store.posts_.push_back(std::move(post));
  }
  return store;
}

bool PostStore::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

const RawPost* PostStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &posts_[it->second];
}

void PostStore::append(std::span<const RawPost> posts) {
  if (posts.empty()) return;
  std::string buffer;
  for (const auto& post : posts) {
    if (contains(post.id)) {
      throw Error(ErrorCode::PreconditionFailed, "duplicate id " + post.id);
    }
    buffer += serialize_post(post);
    buffer += '\n';
  }

  const auto path = file();
  std::error_code ec;
  const auto previous = std::filesystem::exists(path, ec)
                            ? std::filesystem::file_size(path, ec)
                            : std::uintmax_t{0};
  bool ok = false;
  {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (out) {
      out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      out.flush();
      ok = static_cast<bool>(out);
    }
  }
  if (!ok) {
    if (std::filesystem::exists(path, ec)) {
      std::filesystem::resize_file(path, previous, ec);
    }
    throw Error(ErrorCode::IoError, "write failed: " + path.string());
  }

  for (const auto& post : posts) {
    index_.emplace(post.id, posts_.size());
    posts_.push_back(post);
  }
}

IngestStats ingest_file(const std::filesystem::path& path, PostStore& store) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());

  IngestStats stats;
  std::vector<RawPost> fresh;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    ++stats.read;
    RawPost post;
    try {
      post = parse_post(line);
    } catch (const Error& e) {
      ++stats.rejected;
      stats.rejections.push_back(
          {number, std::string(to_string(e.code())) + ": " + e.what()});
      continue;
    }
    if (store.contains(post.id) || seen.contains(post.id)) {
      ++stats.duplicates;
      continue;
    }
    seen.insert(post.id);
    fresh.push_back(std::move(post));
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());

  store.append(fresh);
  stats.accepted = fresh.size();
  return stats;
}

}  // namespace crowdcorrect
