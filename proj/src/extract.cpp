#include "crowdcorrect/extract.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <regex>

namespace crowdcorrect {

namespace {

struct CodePoint {
  char32_t value = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

// Invalid sequences decode byte-by-byte as U+FFFD so offsets stay exact.
std::vector<CodePoint> decode(std::string_view text, std::size_t base) {
  std::vector<CodePoint> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t length = 1;
    char32_t value = lead;
    if (lead >= 0xF0 && lead <= 0xF4) {
      length = 4;
      value = lead & 0x07;
    } else if (lead >= 0xE0) {
      length = 3;
      value = lead & 0x0F;
    } else if (lead >= 0xC2 && lead < 0xE0) {
      length = 2;
      value = lead & 0x1F;
    } else if (lead >= 0x80) {
      length = 0;
    }
    bool valid = length != 0 && i + length <= text.size();
    for (std::size_t k = 1; valid && k < length; ++k) {
      const auto c = static_cast<unsigned char>(text[i + k]);
      if ((c & 0xC0) != 0x80) {
        valid = false;
      } else {
        value = (value << 6) | (c & 0x3F);
      }
    }
    if (!valid) {
      length = 1;
      value = 0xFFFD;
    }
    out.push_back({value, base + i, base + i + length});
    i += length;
  }
  return out;
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v' || c == 0x00A0 || (c >= 0x2000 && c <= 0x200B) ||
         c == 0x202F || c == 0x205F || c == 0x3000;
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  return (c >= 0x00A1 && c <= 0x00BF) || c == 0x00D7 || c == 0x00F7 ||
         (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x303F) || (c >= 0xFF01 && c <= 0xFF0F);
}

bool is_word_char(char32_t c) { return !is_space(c) && (!is_punct(c) || c == '_'); }

bool is_ascii_letter(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_alpha_word(std::span<const CodePoint> cps) {
  return std::all_of(cps.begin(), cps.end(), [](const CodePoint& cp) {
    return is_ascii_letter(cp.value) || (cp.value >= 0x80 && !is_punct(cp.value));
  });
}

bool looks_like_url(std::string_view s) {
  const std::string folded = casefold(s);
  if (folded.starts_with("http://") || folded.starts_with("https://") ||
      folded.starts_with("www.")) {
    return folded.size() > 7;
  }
  static const std::regex kDomain(
      R"(^[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.([A-Za-z]{2,})(/\S*)?$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(s.begin(), s.end(), m, kDomain)) return false;
  if (m[2].matched) return true;
  static const std::array<std::string_view, 16> kTlds = {
      "com", "org", "net", "gov", "edu", "au", "uk", "io",
      "co",  "ly",  "info", "me", "tv", "us", "nz", "ca"};
  const std::string tld = casefold(m[1].str());
  return std::find(kTlds.begin(), kTlds.end(), tld) != kTlds.end();
}

bool url_trailer(char32_t c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' ||
         c == '?' || c == ')' || c == ']' || c == '}' || c == '\'' ||
         c == '"' || (c >= 0x2018 && c <= 0x201F) || c == 0x2026;
}

bool is_number_core(std::string_view s) {
  static const std::regex kNumber(R"(^\d+(?:[.,:/-]\d+)*$)");
  return std::regex_match(s.begin(), s.end(), kNumber);
}

void tokenize_run(std::string_view text, std::size_t run_start,
                  std::size_t run_end, std::vector<Token>& out) {
  const auto cps = decode(text.substr(run_start, run_end - run_start), run_start);
  std::size_t lo = 0;
  std::size_t hi = cps.size();
  auto emit = [&](std::size_t from, std::size_t to, TokenKind kind) {
    const std::size_t start = cps[from].start;
    const std::size_t end = cps[to - 1].end;
    out.push_back({std::string(text.substr(start, end - start)), start, end, kind});
  };

  // Leading punctuation, stopping at a '#'/'@' that introduces a tag.
  while (lo < hi && is_punct(cps[lo].value)) {
    const bool tag = (cps[lo].value == '#' || cps[lo].value == '@') &&
                     lo + 1 < hi && is_word_char(cps[lo + 1].value);
    if (tag) break;
    emit(lo, lo + 1, TokenKind::punctuation);
    ++lo;
  }
  if (lo == hi) return;

  const std::size_t core_start_byte = cps[lo].start;
  const std::string_view rest =
      text.substr(core_start_byte, cps[hi - 1].end - core_start_byte);
  if (looks_like_url(rest)) {
    std::size_t url_hi = hi;
    while (url_hi > lo + 1 && url_trailer(cps[url_hi - 1].value)) --url_hi;
    emit(lo, url_hi, TokenKind::url);
    for (std::size_t k = url_hi; k < hi; ++k) emit(k, k + 1, TokenKind::punctuation);
    return;
  }

  std::size_t core_hi = hi;
  while (core_hi > lo && is_punct(cps[core_hi - 1].value)) --core_hi;
  if (core_hi == lo) {
    for (std::size_t k = lo; k < hi; ++k) emit(k, k + 1, TokenKind::punctuation);
    return;
  }

  TokenKind kind = TokenKind::word;
  if (cps[lo].value == '#') {
    kind = TokenKind::hashtag;
  } else if (cps[lo].value == '@') {
    kind = TokenKind::mention;
  } else {
    const std::string_view core =
        text.substr(cps[lo].start, cps[core_hi - 1].end - cps[lo].start);
    if (is_number_core(core)) kind = TokenKind::number;
  }

  // Single trailing '.' on a short alphabetic word: abbreviation candidate.
  if (kind == TokenKind::word && core_hi < hi && cps[core_hi].value == '.' &&
      (core_hi + 1 == hi || cps[core_hi + 1].value != '.') &&
      core_hi - lo <= 6 &&
      is_alpha_word(std::span<const CodePoint>(cps).subspan(lo, core_hi - lo))) {
    ++core_hi;
  }

  emit(lo, core_hi, kind);
  for (std::size_t k = core_hi; k < hi; ++k) emit(k, k + 1, TokenKind::punctuation);
}

FeatureRecord make_record(std::string_view post_id, FeatureKind kind,
                          std::string surface, std::optional<Span> span) {
  FeatureRecord record;
  record.post_id = std::string(post_id);
  record.kind = kind;
  record.surface = std::move(surface);
  record.span = span;
  record.feature_id = make_feature_id(post_id, kind, span);
  return record;
}

constexpr std::array<std::string_view, 12> kMonths = {
    "january", "february", "march",     "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december"};

constexpr std::array<std::string_view, 7> kWeekdays = {
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};

bool is_month(std::string_view surface) {
  const std::string key = casefold(strip_trailing_period(surface));
  for (auto month : kMonths) {
    if (key == month || (key.size() == 3 && month.starts_with(key))) return true;
    if (key == "sept") return true;
  }
  return false;
}

bool is_weekday(std::string_view surface) {
  const std::string key = casefold(surface);
  return std::find(kWeekdays.begin(), kWeekdays.end(), key) != kWeekdays.end();
}

bool is_day_number(const Token& t) {
  if (t.kind != TokenKind::number || t.surface.size() > 2) return false;
  const int day = std::stoi(t.surface);
  return day >= 1 && day <= 31;
}

bool is_year_number(const Token& t) {
  return t.kind == TokenKind::number &&
         (t.surface.size() == 2 || t.surface.size() == 4) &&
         std::all_of(t.surface.begin(), t.surface.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

bool is_date_token(const Token& t) {
  static const std::regex kIso(
      R"(^\d{4}-\d{2}-\d{2}(?:T\d{2}:\d{2}(?::\d{2})?(?:Z|[+-]\d{2}:?\d{2})?)?$)");
  static const std::regex kSlashed(R"(^\d{1,2}/\d{1,2}/(?:\d{2}|\d{4})$)");
  if (t.kind != TokenKind::number && t.kind != TokenKind::word) return false;
  return std::regex_match(t.surface, kIso) || std::regex_match(t.surface, kSlashed);
}

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::word: return "word";
    case TokenKind::hashtag: return "hashtag";
    case TokenKind::mention: return "mention";
    case TokenKind::url: return "url";
    case TokenKind::number: return "number";
    case TokenKind::punctuation: return "punctuation";
  }
  return "word";
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  const auto cps = decode(text, 0);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space(cps[i].value)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j].value)) ++j;
    tokenize_run(text, cps[i].start, cps[j - 1].end, tokens);
    i = j;
  }
  return tokens;
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::keyword: return "keyword";
    case FeatureKind::hashtag: return "hashtag";
    case FeatureKind::mention: return "mention";
    case FeatureKind::url: return "url";
    case FeatureKind::named_entity: return "named_entity";
    case FeatureKind::time: return "time";
    case FeatureKind::location: return "location";
  }
  return "keyword";
}

std::string_view to_string(FeatureStatus status) {
  switch (status) {
    case FeatureStatus::untouched: return "untouched";
    case FeatureStatus::clean: return "clean";
    case FeatureStatus::auto_corrected: return "auto_corrected";
    case FeatureStatus::needs_crowd: return "needs_crowd";
    case FeatureStatus::crowd_corrected: return "crowd_corrected";
    case FeatureStatus::unresolved: return "unresolved";
  }
  return "untouched";
}

std::string_view to_string(CorrectionMethod method) {
  return method == CorrectionMethod::automatic ? "auto" : "crowd";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view text) {
  for (auto kind : {FeatureKind::keyword, FeatureKind::hashtag,
                    FeatureKind::mention, FeatureKind::url,
                    FeatureKind::named_entity, FeatureKind::time,
                    FeatureKind::location}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::optional<FeatureStatus> parse_feature_status(std::string_view text) {
  for (auto status : {FeatureStatus::untouched, FeatureStatus::clean,
                      FeatureStatus::auto_corrected, FeatureStatus::needs_crowd,
                      FeatureStatus::crowd_corrected, FeatureStatus::unresolved}) {
    if (to_string(status) == text) return status;
  }
  return std::nullopt;
}

std::optional<CorrectionMethod> parse_correction_method(std::string_view text) {
  if (text == "auto") return CorrectionMethod::automatic;
  if (text == "crowd") return CorrectionMethod::crowd;
  return std::nullopt;
}

std::string make_feature_id(std::string_view post_id, FeatureKind kind,
                            std::optional<Span> span) {
  std::string id(post_id);
  id += ':';
  if (span) {
    id += std::to_string(span->start) + "-" + std::to_string(span->end);
  } else {
    id += "geo";
  }
  if (kind != FeatureKind::keyword) {
    id += '/';
    id += to_string(kind);
  }
  return id;
}

const WordSet& default_stopwords() {
  static const WordSet kStopwords = {
      "a", "about", "above", "after", "again", "against", "all", "am", "an",
      "and", "any", "are", "aren't", "as", "at", "be", "because", "been",
      "before", "being", "below", "between", "both", "but", "by", "can",
      "can't", "cannot", "could", "couldn't", "did", "didn't", "do", "does",
      "doesn't", "doing", "don't", "down", "during", "each", "few", "for",
      "from", "further", "get", "got", "had", "hadn't", "has", "hasn't",
      "have", "haven't", "having", "he", "her", "here", "hers", "herself",
      "him", "himself", "his", "how", "i", "i'm", "if", "in", "into", "is",
      "isn't", "it", "it's", "its", "itself", "just", "let's", "like", "me",
      "more", "most", "must", "mustn't", "my", "myself", "no", "nor", "not",
      "now", "of", "off", "on", "once", "only", "or", "other", "ought", "our",
      "ours", "ourselves", "out", "over", "own", "same", "shan't", "she",
      "should", "shouldn't", "so", "some", "such", "than", "that", "that's",
      "the", "their", "theirs", "them", "themselves", "then", "there",
      "there's", "these", "they", "they're", "this", "those", "through", "to",
      "too", "under", "until", "up", "us", "very", "via", "was", "wasn't", "we",
      "we're", "were", "weren't", "what", "when", "where", "which", "while",
      "who", "whom", "why", "will", "with", "won't", "would", "wouldn't",
      "you", "you're", "your", "yours", "yourself", "yourselves"};
  return kStopwords;
}

WordSet load_word_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    const auto entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    words.insert(casefold(entry));
  }
  return words;
}

std::string stopword_key(std::string_view surface) {
  std::string key = casefold(strip_trailing_period(surface));
  // U+2019 RIGHT SINGLE QUOTATION MARK -> '
  std::size_t pos = 0;
  while ((pos = key.find("\xE2\x80\x99", pos)) != std::string::npos) {
    key.replace(pos, 3, "'");
    ++pos;
  }
  return key;
}

std::vector<FeatureRecord> extract_features(const RawPost& post,
                                            const WordSet& stopwords) {
  std::vector<FeatureRecord> records;
  for (const Token& token : tokenize(post.text)) {
    const Span span{token.start, token.end};
    switch (token.kind) {
      case TokenKind::word:
        if (!stopwords.contains(stopword_key(token.surface))) {
          records.push_back(
              make_record(post.id, FeatureKind::keyword, token.surface, span));
        }
        break;
      case TokenKind::hashtag: {
        std::string body = token.surface.substr(1);
        records.push_back(make_record(post.id, FeatureKind::hashtag, body, span));
        records.push_back(make_record(post.id, FeatureKind::keyword, body,
                                      Span{token.start + 1, token.end}));
        break;
      }
      case TokenKind::mention:
        records.push_back(
            make_record(post.id, FeatureKind::mention, token.surface, span));
        break;
      case TokenKind::url:
        records.push_back(make_record(post.id, FeatureKind::url, token.surface, span));
        break;
      case TokenKind::number:
      case TokenKind::punctuation:
        break;
    }
  }
  return records;
}

std::vector<FeatureRecord> extract_entities(std::string_view post_id,
                                            const std::vector<Token>& tokens,
                                            const WordSet& gazetteer) {
  std::vector<FeatureRecord> records;
  bool sentence_start = true;
  for (const Token& token : tokens) {
    if (token.kind == TokenKind::punctuation) {
      if (token.surface == "." || token.surface == "!" || token.surface == "?" ||
          token.surface == "\xE2\x80\xA6") {
        sentence_start = true;
      }
      continue;
    }
    if (token.kind == TokenKind::word) {
      const bool in_gazetteer =
          gazetteer.contains(casefold(strip_trailing_period(token.surface)));
      const bool capitalised = !sentence_start && token.surface.size() > 1 &&
                               starts_with_upper(token.surface);
      if (in_gazetteer || capitalised) {
        records.push_back(make_record(post_id, FeatureKind::named_entity,
                                      token.surface,
                                      Span{token.start, token.end}));
      }
    }
    // An attached period ("opens.") also closes the sentence.
    sentence_start = token.kind == TokenKind::word && token.surface.back() == '.';
  }
  return records;
}

std::vector<FeatureRecord> extract_time_location(
    const std::vector<Token>& tokens, const RawPost& post) {
  std::vector<FeatureRecord> records;
  auto emit = [&](std::size_t first, std::size_t last) {
    const Span span{tokens[first].start, tokens[last].end};
    records.push_back(make_record(post.id, FeatureKind::time,
                                  post.text.substr(span.start, span.length()),
                                  span));
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    const Token& t = tokens[i];
    const bool has1 = i + 1 < tokens.size();
    const bool has2 = i + 2 < tokens.size();
    // <day> <Month> [<year>]
    if (is_day_number(t) && has1 && is_month(tokens[i + 1].surface) &&
        tokens[i + 1].kind == TokenKind::word) {
      if (has2 && is_year_number(tokens[i + 2])) {
        emit(i, i + 2);
        i += 3;
      } else {
        emit(i, i + 1);
        i += 2;
      }
      continue;
    }
    // <Month> <day>[, <year>]
    if (t.kind == TokenKind::word && is_month(t.surface) && has1 &&
        is_day_number(tokens[i + 1])) {
      if (i + 3 < tokens.size() && tokens[i + 2].surface == "," &&
          is_year_number(tokens[i + 3]) && tokens[i + 3].surface.size() == 4) {
        emit(i, i + 3);
        i += 4;
      } else {
        emit(i, i + 1);
        i += 2;
      }
      continue;
    }
    if (is_date_token(t) || (t.kind == TokenKind::word && is_weekday(t.surface))) {
      emit(i, i);
    }
    ++i;
  }

  if (post.geo && !trim(*post.geo).empty()) {
    records.push_back(
        make_record(post.id, FeatureKind::location, *post.geo, std::nullopt));
  }
  return records;
}

std::vector<FeatureRecord> extract_all(const RawPost& post,
                                       const ExtractOptions& options) {
  auto records = extract_features(post, options.stopwords);
  const auto tokens = tokenize(post.text);
  auto entities = extract_entities(post.id, tokens, options.gazetteer);
  auto times = extract_time_location(tokens, post);
  records.insert(records.end(), entities.begin(), entities.end());
  records.insert(records.end(), times.begin(), times.end());
  std::stable_sort(records.begin(), records.end(),
                   [](const FeatureRecord& a, const FeatureRecord& b) {
                     const auto sa = a.span ? a.span->start : SIZE_MAX;
                     const auto sb = b.span ? b.span->start : SIZE_MAX;
                     if (sa != sb) return sa < sb;
                     return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                   });
  return records;
}

}  // namespace crowdcorrect
