#include "crowdcorrect/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace crowdcorrect {

namespace {

std::vector<std::pair<std::string, std::string>> read_tsv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      rows.emplace_back(std::string(trim(line)), std::string());
    } else {
      rows.emplace_back(std::string(trim(std::string_view(line).substr(0, tab))),
                        std::string(trim(std::string_view(line).substr(tab + 1))));
    }
  }
  return rows;
}

std::string lexicon_key(std::string_view word) {
  return casefold(strip_trailing_period(trim(word)));
}

}  // namespace

std::u32string to_code_points(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < utf8.size()) {
    const auto lead = static_cast<unsigned char>(utf8[i]);
    std::size_t length = lead < 0x80 ? 1 : lead >= 0xF0 ? 4 : lead >= 0xE0 ? 3 : lead >= 0xC0 ? 2 : 1;
    if (i + length > utf8.size()) length = 1;
    char32_t value = length == 1 ? lead : lead & (0xFF >> (length + 1));
    for (std::size_t k = 1; k < length; ++k) {
      value = (value << 6) | (static_cast<unsigned char>(utf8[i + k]) & 0x3F);
    }
    out.push_back(value);
    i += length;
  }
  return out;
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  return *bounded_edit_distance(a, b, std::max(a.size(), b.size()));
}

std::optional<std::size_t> bounded_edit_distance(std::u32string_view a,
                                                 std::u32string_view b,
                                                 std::size_t bound) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if ((n > m ? n - m : m - n) > bound) return std::nullopt;

  // Three rolling rows: i-2, i-1, i.
  std::vector<std::size_t> before(m + 1), previous(m + 1), current(m + 1);
  std::iota(previous.begin(), previous.end(), std::size_t{0});
  bool previous_over = *std::min_element(previous.begin(), previous.end()) > bound;
  for (std::size_t i = 1; i <= n; ++i) {
    current[0] = i;
    std::size_t row_min = current[0];
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      std::size_t value = std::min({previous[j] + 1, current[j - 1] + 1,
                                    previous[j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        value = std::min(value, before[j - 2] + 1);
      }
      current[j] = value;
      row_min = std::min(row_min, value);
    }
    const bool current_over = row_min > bound;
    if (current_over && previous_over) return std::nullopt;
    previous_over = current_over;
    std::swap(before, previous);
    std::swap(previous, current);
  }
  const std::size_t distance = previous[m];
  if (distance > bound) return std::nullopt;
  return distance;
}

void Dictionary::add(std::string_view word, std::uint64_t frequency) {
  std::string key = casefold(trim(word));
  if (key.empty()) return;
  max_frequency_ = std::max(max_frequency_, frequency);
  if (auto it = index_.find(key); it != index_.end()) {
    auto& entry = entries_[it->second];
    entry.frequency = std::max(entry.frequency, frequency);
    return;
  }
  Entry entry{key, frequency, to_code_points(key)};
  const std::size_t position = entries_.size();
  by_length_[entry.letters.size()].push_back(position);
  index_.emplace(std::move(key), position);
  entries_.push_back(std::move(entry));
}

bool Dictionary::contains(std::string_view word) const {
  return index_.contains(casefold(word));
}

std::optional<std::uint64_t> Dictionary::frequency(std::string_view word) const {
  auto it = index_.find(casefold(word));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].frequency;
}

double Dictionary::frequency_weight(std::uint64_t frequency) const {
  if (max_frequency_ == 0) return 0.0;
  const double weight = std::log1p(static_cast<double>(frequency)) /
                        std::log1p(static_cast<double>(max_frequency_));
  return std::clamp(weight, 0.0, 1.0);
}

std::vector<const Dictionary::Entry*> Dictionary::entries_of_length(
    std::size_t length) const {
  std::vector<const Entry*> out;
  if (auto it = by_length_.find(length); it != by_length_.end()) {
    for (std::size_t position : it->second) out.push_back(&entries_[position]);
  }
  return out;
}

Dictionary Dictionary::load(const std::filesystem::path& path) {
  Dictionary dictionary;
  for (const auto& [word, frequency] : read_tsv(path)) {
    std::uint64_t value = 1;
    if (!frequency.empty()) {
      try {
        value = std::stoull(frequency);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidField,
                    path.string() + ": bad frequency for " + word);
      }
    }
    dictionary.add(word, value);
  }
  return dictionary;
}

AbbreviationLexicon load_abbreviations(const std::filesystem::path& path) {
  AbbreviationLexicon lexicon;
  for (const auto& [abbreviation, expansions] : read_tsv(path)) {
    auto& list = lexicon[lexicon_key(abbreviation)];
    std::size_t from = 0;
    while (from <= expansions.size()) {
      auto bar = expansions.find('|', from);
      if (bar == std::string::npos) bar = expansions.size();
      const auto item = trim(std::string_view(expansions).substr(from, bar - from));
      if (!item.empty() && std::find(list.begin(), list.end(), item) == list.end()) {
        list.emplace_back(item);
      }
      from = bar + 1;
    }
  }
  return lexicon;
}

JargonMap load_jargon(const std::filesystem::path& path) {
  JargonMap jargon;
  for (const auto& [term, canonical] : read_tsv(path)) {
    if (!canonical.empty()) jargon.emplace(casefold(term), canonical);
  }
  return jargon;
}

std::vector<Candidate> spell_candidates(std::string_view word,
                                        const Dictionary& dictionary,
                                        std::size_t max_edit,
                                        std::string_view source_id) {
  const std::string key = casefold(trim(word));
  if (key.empty()) return {};
  if (dictionary.contains(key)) return {{key, 1.0, std::string(source_id)}};

  const std::u32string query = to_code_points(key);
  struct Hit {
    const Dictionary::Entry* entry;
    std::size_t distance;
  };
  std::vector<Hit> hits;
  const std::size_t lo = query.size() > max_edit ? query.size() - max_edit : 0;
  for (std::size_t length = lo; length <= query.size() + max_edit; ++length) {
    for (const auto* entry : dictionary.entries_of_length(length)) {
      if (auto d = bounded_edit_distance(query, entry->letters, max_edit)) {
        hits.push_back({entry, *d});
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.entry->frequency != b.entry->frequency) {
      return a.entry->frequency > b.entry->frequency;
    }
    return a.entry->word < b.entry->word;
  });

  const double denominator = static_cast<double>(query.size() + 1);
  std::vector<Candidate> out;
  out.reserve(hits.size());
  for (const auto& hit : hits) {
    const double weight = dictionary.frequency_weight(hit.entry->frequency);
    const double penalty = static_cast<double>(hit.distance) + 0.5 * (1.0 - weight);
    out.push_back({hit.entry->word, std::clamp(1.0 - penalty / denominator, 0.0, 1.0),
                   std::string(source_id)});
  }
  return out;
}

std::vector<Candidate> abbrev_candidates(std::string_view word,
                                         const AbbreviationLexicon& lexicon,
                                         std::string_view source_id) {
  auto it = lexicon.find(lexicon_key(word));
  if (it == lexicon.end()) return {};
  std::vector<Candidate> out;
  for (std::size_t rank = 0; rank < it->second.size(); ++rank) {
    out.push_back({it->second[rank], 1.0 / static_cast<double>(rank + 1),
                   std::string(source_id)});
  }
  return out;
}

std::vector<Candidate> jargon_candidates(std::string_view word,
                                         const JargonMap& jargon,
                                         std::string_view source_id) {
  auto it = jargon.find(casefold(trim(word)));
  if (it == jargon.end()) return {};
  return {{it->second, 1.0, std::string(source_id)}};
}

SpellSource::SpellSource(std::shared_ptr<const Dictionary> dictionary,
                         std::size_t max_edit, std::string source_id)
    : dictionary_(std::move(dictionary)),
      max_edit_(max_edit),
      descriptor_{std::move(source_id), IssueClass::misspelling, SourceKind::local, {}} {}

std::vector<Candidate> SpellSource::lookup(std::string_view word) const {
  return spell_candidates(word, *dictionary_, max_edit_, descriptor_.source_id);
}

AbbreviationSource::AbbreviationSource(
    std::shared_ptr<const AbbreviationLexicon> lexicon, std::string source_id)
    : lexicon_(std::move(lexicon)),
      descriptor_{std::move(source_id), IssueClass::abbreviation, SourceKind::local, {}} {}

std::vector<Candidate> AbbreviationSource::lookup(std::string_view word) const {
  return abbrev_candidates(word, *lexicon_, descriptor_.source_id);
}

JargonSource::JargonSource(std::shared_ptr<const JargonMap> jargon,
                           std::string source_id)
    : jargon_(std::move(jargon)),
      descriptor_{std::move(source_id), IssueClass::jargon, SourceKind::local, {}} {}

std::vector<Candidate> JargonSource::lookup(std::string_view word) const {
  return jargon_candidates(word, *jargon_, descriptor_.source_id);
}

RemoteSource::RemoteSource(SourceDescriptor descriptor)
    : descriptor_(std::move(descriptor)) {
  descriptor_.kind = SourceKind::remote;
  if (!descriptor_.config.contains("endpoint")) {
    throw Error(ErrorCode::InvalidArgument,
                "remote source " + descriptor_.source_id + " has no endpoint");
  }
}

Lexicons Lexicons::load(const std::filesystem::path& dir) {
  Lexicons lexicons;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoError, "lexicon directory not found: " + dir.string());
  }
  if (auto p = dir / "dictionary.tsv"; std::filesystem::exists(p, ec)) {
    lexicons.dictionary = std::make_shared<const Dictionary>(Dictionary::load(p));
  }
  if (auto p = dir / "abbreviations.tsv"; std::filesystem::exists(p, ec)) {
    lexicons.abbreviations =
        std::make_shared<const AbbreviationLexicon>(load_abbreviations(p));
  }
  if (auto p = dir / "jargon.tsv"; std::filesystem::exists(p, ec)) {
    lexicons.jargon = std::make_shared<const JargonMap>(load_jargon(p));
  }
  if (auto p = dir / "remote.json"; std::filesystem::exists(p, ec)) {
    std::ifstream in(p);
    nlohmann::json list;
    try {
      list = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedJson, p.string() + ": " + e.what());
    }
    if (!list.is_array()) {
      throw Error(ErrorCode::InvalidField, p.string() + ": expected a list");
    }
    for (const auto& item : list) {
      SourceDescriptor source;
      source.kind = SourceKind::remote;
      source.source_id = item.value("source_id", "");
      const auto issue = parse_issue_class(item.value("issue_class", ""));
      if (source.source_id.empty() || !issue || *issue == IssueClass::none ||
          !item.contains("endpoint")) {
        throw Error(ErrorCode::InvalidField, p.string() + ": bad remote source");
      }
      source.issue_class = *issue;
      source.config["endpoint"] = item.at("endpoint").get<std::string>();
      if (item.contains("timeout_ms")) {
        source.config["timeout_ms"] = std::to_string(item.at("timeout_ms").get<int>());
      }
      lexicons.remote.push_back(std::move(source));
    }
  }
  return lexicons;
}

const std::vector<std::shared_ptr<const KnowledgeSource>>& SourceSet::for_issue(
    IssueClass issue) const {
  static const std::vector<std::shared_ptr<const KnowledgeSource>> kEmpty;
  switch (issue) {
    case IssueClass::jargon: return jargon;
    case IssueClass::abbreviation: return abbreviation;
    case IssueClass::misspelling: return spelling;
    case IssueClass::none: return kEmpty;
  }
  return kEmpty;
}

SourceSet SourceSet::from_lexicons(const Lexicons& lexicons, std::size_t max_edit) {
  SourceSet sources;
  if (lexicons.jargon) {
    sources.jargon.push_back(std::make_shared<JargonSource>(lexicons.jargon));
  }
  if (lexicons.abbreviations) {
    sources.abbreviation.push_back(
        std::make_shared<AbbreviationSource>(lexicons.abbreviations));
  }
  if (lexicons.dictionary) {
    sources.spelling.push_back(
        std::make_shared<SpellSource>(lexicons.dictionary, max_edit));
  }
  for (const auto& remote : lexicons.remote) {
    auto source = std::make_shared<RemoteSource>(remote);
    switch (remote.issue_class) {
      case IssueClass::jargon: sources.jargon.push_back(source); break;
      case IssueClass::abbreviation: sources.abbreviation.push_back(source); break;
      case IssueClass::misspelling: sources.spelling.push_back(source); break;
      case IssueClass::none: break;
    }
  }
  return sources;
}

}  // namespace crowdcorrect
