#include "crowdcorrect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crowdcorrect/extract.hpp"
#include "crowdcorrect/random.hpp"
#include "crowdcorrect/store.hpp"

namespace crowdcorrect {

namespace {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

// Slang term -> canonical vocabulary word.
const std::vector<std::pair<std::string, std::string>>& jargon_pairs() {
  static const std::vector<std::pair<std::string, std::string>> kPairs = {
      {"meds", "medicine"},      {"doc", "doctor"},        {"vax", "vaccine"},
      {"jab", "vaccine"},        {"rx", "prescription"},   {"er", "emergency"},
      {"chemo", "chemotherapy"}, {"physio", "physiotherapy"}, {"ortho", "orthopedic"},
      {"preggers", "pregnancy"}, {"tummy", "stomach"},      {"ticker", "heart"},
      {"paeds", "pediatrician"}, {"abx", "antibiotic"},     {"temp", "fever"},
      {"footy", "football"},     {"bball", "basketball"},  {"telly", "television"},
      {"cuppa", "coffee"},       {"flick", "movie"},       {"gig", "concert"},
      {"hols", "holiday"},       {"bday", "birthday"},     {"pod", "podcast"},
      {"ref", "referee"},        {"resto", "restaurant"},  {"comp", "computer"},
      {"tmrw", "tomorrow"},      {"fam", "family"},        {"peeps", "people"},
      {"thx", "thanks"},         {"luv", "love"},          {"nite", "night"},
      {"wknd", "weekend"},       {"mornin", "morning"},    {"pic", "photo"},
      {"vid", "video"},          {"convo", "question"},    {"bestie", "friends"},
      {"hood", "community"},     {"arvo", "evening"},      {"biz", "work"},
  };
  return kPairs;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> kFillers = {
      "the", "at", "for", "with", "my", "is", "so", "and", "this", "to", "in", "our", "a"};
  return kFillers;
}

std::size_t weighted_index(std::mt19937_64& rng, const std::vector<double>& cumulative) {
  const double r = uniform01(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

// Given words first, keeping relative order; sampling weight is 1/rank.
std::vector<std::string> rank_words(const std::vector<std::string>& words,
                                    const std::set<std::string>& preferred) {
  std::vector<std::string> ranked = words;
  std::stable_partition(ranked.begin(), ranked.end(),
                        [&](const std::string& w) { return preferred.contains(w); });
  return ranked;
}

struct Pool {
  std::vector<std::string> words;
  std::vector<double> cumulative;
  std::vector<double> weights;
};

Pool make_pool(const std::vector<std::string>& ranked) {
  Pool pool;
  pool.words = ranked;
  double total = 0.0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const double w = 1.0 / static_cast<double>(r + 1);
    pool.weights.push_back(w);
    total += w;
    pool.cumulative.push_back(total);
  }
  return pool;
}

struct Slot {
  std::string word;  // clean form
  bool content = false;
  std::optional<IssueClass> issue;
  std::string surface;  // corrupted form when issue is set
};

struct Draft {
  std::vector<Slot> slots;
  std::vector<std::string> hashtags;
  std::optional<std::string> mention;
  std::optional<std::string> url;
  int label = 0;
};

std::optional<std::string> misspell(const std::string& word, std::mt19937_64& rng,
                                    const std::set<std::string>& forbidden) {
  static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::string out = word;
    const std::size_t n = out.size();
    switch (uniform_index(rng, 4)) {
      case 0: {  // insertion
        const std::size_t pos = uniform_index(rng, n + 1);
        out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos),
                   kLetters[uniform_index(rng, kLetters.size())]);
        break;
      }
      case 1: {  // deletion
        out.erase(uniform_index(rng, n), 1);
        break;
      }
      case 2: {  // substitution
        out[uniform_index(rng, n)] = kLetters[uniform_index(rng, kLetters.size())];
        break;
      }
      default: {  // adjacent transposition
        const std::size_t pos = uniform_index(rng, n - 1);
        std::swap(out[pos], out[pos + 1]);
        break;
      }
    }
    if (out != word && !forbidden.contains(out)) return out;
  }
  return std::nullopt;
}

std::size_t exact_count(double rate, std::size_t total) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(total)));
}

}  // namespace

const std::vector<std::string>& health_words() {
  static const auto kWords = split_words(
      "hospital doctor nurse patient medicine vaccine clinic surgery therapy diabetes "
      "cancer fever infection virus symptom diagnosis treatment pharmacy prescription "
      "cardiology blood pressure heart lungs asthma allergy insulin cholesterol obesity "
      "nutrition vitamin protein injury fracture ambulance emergency recovery wellness "
      "disease illness headache migraine stomach kidney liver brain stroke dementia "
      "anxiety depression counseling dentist teeth hearing pregnancy midwife "
      "pediatrician surgeon physician antibiotic pandemic epidemic outbreak immunity "
      "antibody tablet capsule dosage syringe bandage checkup screening biopsy tumor "
      "chemotherapy radiology scan xray cough flu sneezing rash bacteria hygiene "
      "sanitizer ward intensive icu paramedic caregiver hospice rehab physiotherapy "
      "orthopedic arthritis eczema inhaler hepatitis malaria measles");
  return kWords;
}

const std::vector<std::string>& other_words() {
  static const auto kWords = split_words(
      "football basketball soccer stadium coach player tournament championship league "
      "season concert guitar album movie cinema actor festival theatre painting gallery "
      "museum travel airport flight hotel beach mountain camping restaurant pizza "
      "burger coffee recipe kitchen dinner cooking fashion shopping market economy "
      "stocks budget election president senate voting campaign computer software "
      "laptop phone internet website gaming console robot rocket satellite weather "
      "storm rainfall traffic highway railway bicycle garden flowers puppy kitten "
      "wedding birthday party holiday school teacher student homework library novel "
      "poetry journalism newspaper television podcast camera photography dance singer "
      "painter fishing sailing chess puzzle lottery parade skateboard surfing marathon "
      "trophy referee");
  return kWords;
}

const std::vector<std::string>& shared_words() {
  static const auto kWords = split_words(
      "today tomorrow morning evening night weekend month year people family friends "
      "great amazing awesome happy tired busy early late finally everyone city town "
      "home work news story update check share love hate need want think feel looking "
      "start better best worst long little week fresh big good bad help thanks stay "
      "ready waiting wonderful terrible local national world online free open closed "
      "team group service plan report live video photo post article question answer "
      "idea problem change future past moment center office building street road area "
      "community public private special important serious simple quick slow hard easy "
      "real true friday");
  return kWords;
}

const Corruption* SynthCorpus::find(std::string_view post_id, Span span) const {
  for (const auto& c : corruptions) {
    if (c.post_id == post_id && c.span == span) return &c;
  }
  return nullptr;
}

SynthCorpus generate_corpus(const SynthConfig& config) {
  for (double rate : {config.misspelling_rate, config.abbreviation_rate, config.jargon_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "noise rates must be in [0, 1]");
    }
  }
  SynthCorpus corpus;
  std::mt19937_64 rng(derive_seed(config.seed, "synth"));

  std::set<std::string> vocabulary;
  for (const auto* group : {&health_words(), &other_words(), &shared_words()}) {
    vocabulary.insert(group->begin(), group->end());
  }

  std::map<std::string, std::vector<std::string>> terms_for;
  for (const auto& [term, canonical] : jargon_pairs()) {
    corpus.jargon[term] = canonical;
    terms_for[canonical].push_back(term);
  }
  std::set<std::string> canonicals;
  for (const auto& [canonical, terms] : terms_for) canonicals.insert(canonical);

  const Pool health = make_pool(rank_words(health_words(), canonicals));
  const Pool other = make_pool(rank_words(other_words(), canonicals));
  const Pool shared = make_pool(rank_words(shared_words(), canonicals));

  // Dictionary frequencies follow the sampling weights.
  for (const Pool* pool : {&health, &other, &shared}) {
    for (std::size_t r = 0; r < pool->words.size(); ++r) {
      corpus.dictionary.add(pool->words[r],
                            static_cast<std::uint64_t>(std::llround(1000.0 * pool->weights[r])));
    }
  }

  std::set<std::string> forbidden = vocabulary;
  for (const auto& w : default_stopwords()) forbidden.insert(w);
  for (const auto& [term, canonical] : corpus.jargon) forbidden.insert(term);

  // One abbreviation per word of six or more letters: the shortest free prefix.
  std::map<std::string, std::string> abbreviation_of;
  for (const auto& word : vocabulary) {
    if (word.size() < 6) continue;
    for (std::size_t length : {4u, 3u, 5u}) {
      const std::string key = word.substr(0, length);
      if (forbidden.contains(key) || corpus.abbreviations.contains(key)) continue;
      corpus.abbreviations[key] = {word};
      abbreviation_of[word] = key;
      break;
    }
  }
  for (const auto& [key, expansions] : corpus.abbreviations) forbidden.insert(key);

  std::vector<Draft> drafts(config.posts);
  for (auto& draft : drafts) {
    draft.label = uniform01(rng) < 0.5 ? 1 : 0;
    const Pool& topic = draft.label == 1 ? health : other;
    // One to three topic words: 30% / 50% / 20%.
    const double u_signal = uniform01(rng);
    const std::size_t n_signal = u_signal < 0.3 ? 1 : (u_signal < 0.8 ? 2 : 3);
    const std::size_t n_shared = 3 + uniform_index(rng, 4);
    std::vector<std::string> content;
    for (std::size_t i = 0; i < n_signal; ++i) {
      content.push_back(topic.words[weighted_index(rng, topic.cumulative)]);
    }
    for (std::size_t i = 0; i < n_shared; ++i) {
      content.push_back(shared.words[weighted_index(rng, shared.cumulative)]);
    }
    shuffle_in_place(content, rng);
    for (const auto& word : content) {
      if (!draft.slots.empty() && uniform01(rng) < 0.4) {
        const auto& fillers = filler_words();
        draft.slots.push_back({fillers[uniform_index(rng, fillers.size())], false, {}, {}});
      }
      draft.slots.push_back({word, true, {}, {}});
    }
    if (uniform01(rng) < 0.1) draft.mention = "@user" + std::to_string(uniform_index(rng, 50));
    if (uniform01(rng) < 0.1) {
      draft.url = "https://example.org/p/" + std::to_string(uniform_index(rng, 1000));
    }
    if (uniform01(rng) < 0.25) {
      draft.hashtags.push_back(shared.words[weighted_index(rng, shared.cumulative)]);
    }
  }

  struct Position {
    std::size_t post;
    std::size_t slot;
  };
  std::vector<Position> positions;
  for (std::size_t p = 0; p < drafts.size(); ++p) {
    for (std::size_t s = 0; s < drafts[p].slots.size(); ++s) {
      if (drafts[p].slots[s].content) positions.push_back({p, s});
    }
  }
  corpus.word_tokens = positions.size();
  shuffle_in_place(positions, rng);

  auto corrupt = [&](IssueClass issue, double rate, auto eligible, auto surface_of) {
    const std::size_t target = exact_count(rate, positions.size());
    std::size_t done = 0;
    for (const auto& pos : positions) {
      if (done == target) break;
      Slot& slot = drafts[pos.post].slots[pos.slot];
      if (slot.issue || !eligible(slot.word)) continue;
      auto surface = surface_of(slot.word);
      if (!surface) continue;
      slot.issue = issue;
      slot.surface = *surface;
      ++done;
    }
    if (done < target) {
      throw Error(ErrorCode::InvalidArgument,
                  "not enough eligible tokens for " + std::string(to_string(issue)));
    }
  };

  corrupt(
      IssueClass::jargon, config.jargon_rate,
      [&](const std::string& w) { return terms_for.contains(w); },
      [&](const std::string& w) -> std::optional<std::string> {
        const auto& terms = terms_for.at(w);
        return terms[uniform_index(rng, terms.size())];
      });
  corrupt(
      IssueClass::abbreviation, config.abbreviation_rate,
      [&](const std::string& w) { return abbreviation_of.contains(w); },
      [&](const std::string& w) -> std::optional<std::string> {
        std::string key = abbreviation_of.at(w);
        if (uniform01(rng) < 0.5) key += '.';
        return key;
      });
  corrupt(
      IssueClass::misspelling, config.misspelling_rate,
      [&](const std::string& w) { return w.size() >= 4; },
      [&](const std::string& w) { return misspell(w, rng, forbidden); });

  for (std::size_t p = 0; p < drafts.size(); ++p) {
    const Draft& draft = drafts[p];
    SynthPost post;
    char id[16];
    std::snprintf(id, sizeof id, "p%04zu", p + 1);
    post.id = id;
    post.label = draft.label;
    post.hashtags = draft.hashtags;

    std::string text;
    std::string clean;
    auto append = [](std::string& out, std::string_view piece) {
      if (!out.empty()) out += ' ';
      out += piece;
    };
    if (draft.mention) {
      append(text, *draft.mention);
      append(clean, *draft.mention);
    }
    bool first_word = true;
    for (const Slot& slot : draft.slots) {
      std::string shown = slot.issue ? slot.surface : slot.word;
      std::string plain = slot.word;
      if (first_word) {
        shown = capitalize_first(shown);
        plain = capitalize_first(plain);
        first_word = false;
      }
      if (!text.empty()) text += ' ';
      if (!clean.empty()) clean += ' ';
      if (slot.issue) {
        corpus.corruptions.push_back({post.id, Span{text.size(), text.size() + shown.size()},
                                      *slot.issue, shown, slot.word});
      }
      text += shown;
      clean += plain;
    }
    for (const auto& tag : draft.hashtags) {
      append(text, "#" + tag);
      append(clean, "#" + tag);
    }
    if (draft.url) {
      append(text, *draft.url);
      append(clean, *draft.url);
    }
    post.text = std::move(text);
    post.clean_text = std::move(clean);
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

void write_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir / "lexicons");

  std::string posts;
  std::string labels = "post_id,label\n";
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    const SynthPost& post = corpus.posts[i];
    nlohmann::json j;
    j["id"] = post.id;
    j["text"] = post.text;
    j["hashtags"] = post.hashtags;
    j["user"] = "synth" + std::to_string(i % 37);
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "2019-06-%02zuT%02zu:%02zu:00Z", 1 + i % 28, i % 24,
                  (i * 7) % 60);
    j["created_at"] = stamp;
    posts += j.dump() + "\n";
    labels += post.id + "," + std::to_string(post.label) + "\n";
  }
  write_file(dir / "posts.jsonl", posts);
  write_file(dir / "labels.csv", labels);

  std::string truth = "post_id,start,end,issue_class,surface,truth\n";
  for (const auto& c : corpus.corruptions) {
    truth += c.post_id + "," + std::to_string(c.span.start) + "," + std::to_string(c.span.end) +
             "," + std::string(to_string(c.issue)) + "," + csv_field(c.surface) + "," +
             csv_field(c.truth) + "\n";
  }
  write_file(dir / "truth.csv", truth);

  std::string dictionary;
  for (const auto& entry : corpus.dictionary.entries()) {
    dictionary += entry.word + "\t" + std::to_string(entry.frequency) + "\n";
  }
  write_file(dir / "lexicons" / "dictionary.tsv", dictionary);

  std::string abbreviations;
  for (const auto& [key, expansions] : corpus.abbreviations) {
    abbreviations += key + "\t";
    for (std::size_t i = 0; i < expansions.size(); ++i) {
      abbreviations += (i ? "|" : "") + expansions[i];
    }
    abbreviations += "\n";
  }
  write_file(dir / "lexicons" / "abbreviations.tsv", abbreviations);

  std::string jargon;
  for (const auto& [term, canonical] : corpus.jargon) jargon += term + "\t" + canonical + "\n";
  write_file(dir / "lexicons" / "jargon.tsv", jargon);
}

std::map<std::string, int> load_labels(const std::filesystem::path& file) {
  std::istringstream in(read_file(file));
  std::map<std::string, int> labels;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = parse_csv_line(line);
    if (number == 1 && !fields.empty() && fields[0] == "post_id") continue;
    if (fields.size() != 2 || (fields[1] != "0" && fields[1] != "1")) {
      throw Error(ErrorCode::InvalidField,
                  "labels line " + std::to_string(number) + ": expected post_id,0|1");
    }
    labels[fields[0]] = fields[1] == "1" ? 1 : 0;
  }
  return labels;
}

}  // namespace crowdcorrect
