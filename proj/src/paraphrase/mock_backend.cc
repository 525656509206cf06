#include "paraforge/mock_backend.h"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_set>

#include "paraforge/rng.h"

namespace paraforge {

namespace {

using Words = std::vector<std::string>;

const std::vector<std::pair<std::string, std::string>>& contractions() {
  static const std::vector<std::pair<std::string, std::string>> kPairs = {
      {"do not", "don't"},    {"does not", "doesn't"}, {"can not", "can't"},
      {"cannot", "can't"},    {"i am", "i'm"},         {"it is", "it's"},
      {"what is", "what's"},  {"is not", "isn't"},     {"i have", "i've"},
      {"i will", "i'll"},     {"you are", "you're"},   {"that is", "that's"},
      {"where is", "where's"}, {"how is", "how's"},    {"are not", "aren't"},
      {"je ne sais pas", "j'sais pas"},
  };
  return kPairs;
}

const std::vector<std::pair<std::string, std::string>>& determiners() {
  static const std::vector<std::pair<std::string, std::string>> kPairs = {
      {"the", "a"}, {"a", "the"},   {"an", "the"},  {"this", "that"},
      {"le", "un"}, {"la", "une"},  {"un", "le"},   {"une", "la"},
      {"mon", "le"}, {"ma", "la"},
  };
  return kPairs;
}

const std::vector<std::string>& courtesy_prefixes() {
  static const std::vector<std::string> kList = {
      "please", "hey", "so", "ok", "hi", "hello", "well", "quick question",
      "excuse me", "um"};
  return kList;
}

const std::vector<std::string>& courtesy_suffixes() {
  static const std::vector<std::string> kList = {
      "please", "thanks", "thank you", "now", "for me", "asap", "today"};
  return kList;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

Words split_words(std::string_view text) {
  Words words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string join(const Words& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

// Replace words[start, start+length) with `replacement`.
struct Edit {
  std::size_t start = 0;
  std::size_t length = 0;
  Words replacement;
};

std::string apply(const Words& words, const std::vector<const Edit*>& edits) {
  Words out;
  std::size_t i = 0;
  for (const Edit* e : edits) {
    while (i < e->start) out.push_back(words[i++]);
    out.insert(out.end(), e->replacement.begin(), e->replacement.end());
    i = e->start + e->length;
  }
  while (i < words.size()) out.push_back(words[i++]);
  return join(out);
}

// Phrase replacement keeping the trailing punctuation of the matched span
// and the capitalization of its first letter.
Edit phrase_edit(const Words& words, std::size_t start, std::size_t length,
                 std::string_view replacement) {
  Words repl = split_words(replacement);
  const std::string& first = words[start];
  if (!first.empty() && std::isupper(static_cast<unsigned char>(first[0])) &&
      !repl.empty() && !repl[0].empty()) {
    repl[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(repl[0][0])));
  }
  const std::string& last = words[start + length - 1];
  std::size_t cut = last.size();
  while (cut > 0 && is_trailing_punct(last[cut - 1])) --cut;
  if (!repl.empty()) repl.back() += last.substr(cut);
  return {start, length, std::move(repl)};
}

// Does `phrase` (lower-case words) match at words[start]? Only the final
// word may carry trailing punctuation.
std::optional<std::size_t> match_at(const Words& lowered, std::size_t start,
                                    const Words& phrase) {
  if (phrase.empty() || start + phrase.size() > lowered.size()) return std::nullopt;
  for (std::size_t k = 0; k < phrase.size(); ++k) {
    std::string_view word = lowered[start + k];
    if (k + 1 == phrase.size()) {
      while (!word.empty() && is_trailing_punct(word.back())) word.remove_suffix(1);
    }
    if (word != phrase[k]) return std::nullopt;
  }
  return phrase.size();
}

void add_swaps(const Words& lowered, const std::string& from,
               const std::string& to, std::vector<Edit>& edits,
               const Words& words) {
  const Words phrase = split_words(from);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (auto len = match_at(lowered, i, phrase)) {
      edits.push_back(phrase_edit(words, i, *len, to));
    }
  }
}

std::vector<std::string> make_variants(const std::string& core,
                                       std::size_t needed, SplitMix64& rng) {
  const Words words = split_words(core);
  Words lowered;
  for (const auto& w : words) lowered.push_back(ascii_lower(w));

  std::vector<Edit> synonyms;
  for (const auto& group : mock_synonym_groups()) {
    for (const auto& member : group) {
      for (const auto& other : group) {
        if (other != member) add_swaps(lowered, member, other, synonyms, words);
      }
    }
  }
  std::vector<Edit> toggles;
  for (const auto& [a, b] : contractions()) {
    add_swaps(lowered, a, b, toggles, words);
    add_swaps(lowered, b, a, toggles, words);
  }
  for (const auto& [a, b] : determiners()) add_swaps(lowered, a, b, toggles, words);
  std::vector<Edit> swaps;
  for (std::size_t i = 0; i + 1 < words.size() && i < 3; ++i) {
    swaps.push_back({i, 2, {words[i + 1], words[i]}});
  }
  shuffle(rng, synonyms);
  shuffle(rng, toggles);

  std::vector<Edit> edits;
  for (auto* family : {&synonyms, &toggles, &swaps}) {
    edits.insert(edits.end(), family->begin(), family->end());
  }

  std::vector<std::string> out;
  std::unordered_set<std::string> seen{core};
  auto offer = [&](std::string text) {
    if (out.size() < needed && seen.insert(text).second) out.push_back(std::move(text));
  };

  for (const Edit& e : edits) offer(apply(words, {&e}));
  for (std::size_t a = 0; a < edits.size() && out.size() < needed; ++a) {
    for (std::size_t b = 0; b < edits.size() && out.size() < needed; ++b) {
      const Edit& first = edits[a];
      const Edit& second = edits[b];
      if (second.start < first.start + first.length) continue;
      offer(apply(words, {&first, &second}));
    }
  }
  for (std::size_t round = 0; out.size() < needed; ++round) {
    const std::string base = round == 0 ? core : out[(round - 1) % out.size()];
    for (const auto& p : courtesy_prefixes()) offer(p + " " + base);
    for (const auto& s : courtesy_suffixes()) offer(base + " " + s);
    if (round > 4 * needed) offer(std::string(round, '+') + " " + core);
  }
  return out;
}

// Same words, different bytes: normalizes to the same key as `text`.
std::string noisy_copy(const std::string& text,
                       const std::unordered_set<std::string>& taken) {
  std::string capital = text;
  if (!capital.empty()) {
    capital[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(capital[0])));
  }
  std::string upper = text;
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const std::vector<std::string> options = {
      text + "?", capital + ".", text + "!", capital + "?", upper + "?", upper + "!"};
  for (const auto& o : options) {
    if (!taken.count(o)) return o;
  }
  for (std::size_t n = 2;; ++n) {
    std::string o = text + std::string(n, '.');
    if (!taken.count(o)) return o;
  }
}

std::pair<std::optional<std::string>, std::string> split_tag(const std::string& text) {
  if (text.size() >= 4 && text[0] == '<') {
    std::size_t close = text.find("> ");
    if (close != std::string::npos && close > 1 && close < 12) {
      return {text.substr(1, close - 1), text.substr(close + 2)};
    }
  }
  return {std::nullopt, text};
}

}  // namespace

const std::vector<std::vector<std::string>>& mock_synonym_groups() {
  static const std::vector<std::vector<std::string>> kGroups = {
      // phrasal
      {"need to", "have to", "must"},
      {"apply for", "request", "ask for"},
      {"i want", "i would like", "i'd like"},
      {"how do i", "how can i"},
      {"tell me", "show me", "let me know"},
      {"help me", "assist me"},
      {"new", "another"},
      // content words, one word per member
      {"buy", "purchase", "acquire"},
      {"cancel", "revoke", "terminate"},
      {"book", "reserve", "schedule"},
      {"car", "vehicle", "automobile"},
      {"flight", "airfare", "plane"},
      {"hotel", "lodging", "accommodation"},
      {"balance", "funds", "savings"},
      {"transfer", "wire", "remit"},
      {"money", "cash", "currency"},
      {"password", "passcode", "credentials"},
      {"reset", "restore", "renew"},
      {"weather", "forecast", "climate"},
      {"recipe", "dish", "meal"},
      {"song", "track", "tune"},
      {"alarm", "alert", "reminder"},
      {"calendar", "agenda", "planner"},
      {"doctor", "physician", "clinician"},
      {"bill", "invoice", "statement"},
      {"shipment", "package", "parcel"},
      {"translate", "interpret", "convert"},
      {"restaurant", "eatery", "diner"},
      {"job", "occupation", "profession"},
      {"vacation", "holiday", "leave"},
      {"insurance", "coverage", "policy"},
      {"address", "location", "residence"},
      {"phone", "mobile", "cellphone"},
      {"timer", "stopwatch", "countdown"},
      {"meeting", "appointment", "conference"},
      // French
      {"changer", "modifier"},
      {"mot de passe", "code secret"},
      {"compte", "profil"},
      {"commander", "acheter"},
      {"virement", "transfert"},
      {"je veux", "je voudrais", "j'aimerais"},
      {"comment", "de quelle façon"},
      {"devises", "monnaies"},
  };
  return kGroups;
}

BackendResponse mock_generate(const BackendRequest& request, std::uint64_t seed,
                              double collision_rate) {
  const std::size_t wanted =
      static_cast<std::size_t>(std::max(0, request.num_hypotheses));
  SplitMix64 rng = SplitMix64::keyed(
      seed, request.source_language + '\x1f' + request.target_language + '\x1f' +
                std::to_string(request.num_hypotheses) + '\x1f' + request.text);

  auto [tag, core] = split_tag(request.text);
  const bool translating = request.source_language != request.target_language;
  std::string prefix;
  std::vector<std::string> texts;
  if (translating) {
    if (!(tag && *tag == request.source_language)) {
      prefix = "<" + request.target_language + "> ";
    }
    if (wanted > 0) texts.push_back(core);
    auto variants = make_variants(core, wanted > 0 ? wanted - 1 : 0, rng);
    texts.insert(texts.end(), variants.begin(), variants.end());
  } else {
    if (tag) prefix = "<" + *tag + "> ";
    texts = make_variants(core, wanted, rng);
  }

  if (collision_rate > 0.0) {
    std::unordered_set<std::string> taken(texts.begin(), texts.end());
    taken.insert(core);
    const std::size_t first_variant = translating ? 1 : 0;
    for (std::size_t i = first_variant; i < texts.size(); ++i) {
      if (rng.unit() >= collision_rate) continue;
      std::size_t choice = rng.below(i + 1);  // i == choice means the input
      const std::string& target = choice < i ? texts[choice] : core;
      texts[i] = noisy_copy(target, taken);
      taken.insert(texts[i]);
    }
  }

  BackendResponse response;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const double rank = static_cast<double>(i + 1);
    response.hypotheses.push_back(
        {prefix + texts[i], -0.35 * rank - 0.2 * rng.unit(), static_cast<int>(i + 1)});
  }
  return response;
}

BackendResponse MockBackend::generate(const BackendRequest& request) {
  ++calls_;
  return mock_generate(request, options_.seed, options_.collision_rate);
}

}  // namespace paraforge
