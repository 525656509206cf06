#include "paraforge/corpus.h"

#include <algorithm>
#include <sstream>

#include "paraforge/error.h"
#include "paraforge/io.h"
#include "paraforge/rng.h"

namespace paraforge {

using nlohmann::json;

namespace {

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  });
}

Origin parse_origin(const std::string& value, std::size_t line) {
  if (value == "original") return Origin::kOriginal;
  if (value == "paraphrase") return Origin::kParaphrase;
  fail(ErrorKind::kParse, "line " + std::to_string(line) +
                              ": unknown origin '" + value + "'");
}

}  // namespace

std::string_view to_string(Origin origin) {
  return origin == Origin::kOriginal ? "original" : "paraphrase";
}

std::string_view to_string(Method method) {
  return method == Method::kPivot ? "pivot" : "lm";
}

std::string dataset_label(const GenerationTrace& trace) {
  if (trace.method == Method::kLm) return "LM";
  return "NMT-" + trace.pivot_language.value_or("?");
}

json trace_to_json(const GenerationTrace& trace) {
  json hops = json::array();
  for (const auto& hop : trace.hops) {
    hops.push_back({{"from", hop.source_language},
                    {"to", hop.target_language},
                    {"rank", hop.rank}});
  }
  json out = {{"backend_id", trace.backend_id},
              {"method", std::string(to_string(trace.method))},
              {"rank", trace.rank},
              {"score", trace.score},
              {"source_text", trace.source_text},
              {"hops", std::move(hops)}};
  if (trace.pivot_language) out["pivot_language"] = *trace.pivot_language;
  return out;
}

GenerationTrace trace_from_json(const json& in) {
  GenerationTrace trace;
  trace.backend_id = in.at("backend_id").get<std::string>();
  const auto method = in.at("method").get<std::string>();
  if (method == "pivot") {
    trace.method = Method::kPivot;
  } else if (method == "lm") {
    trace.method = Method::kLm;
  } else {
    fail(ErrorKind::kParse, "unknown trace method '" + method + "'");
  }
  if (in.contains("pivot_language") && !in["pivot_language"].is_null()) {
    trace.pivot_language = in["pivot_language"].get<std::string>();
  }
  trace.rank = in.at("rank").get<int>();
  trace.score = in.at("score").get<double>();
  trace.source_text = in.at("source_text").get<std::string>();
  if (in.contains("hops")) {
    for (const auto& hop : in["hops"]) {
      trace.hops.push_back({hop.at("from").get<std::string>(),
                            hop.at("to").get<std::string>(),
                            hop.at("rank").get<int>()});
    }
  }
  return trace;
}

Sample::Sample(std::string text, std::string intent, std::string language,
               Origin origin, std::optional<GenerationTrace> trace)
    : text_(std::move(text)),
      intent_(std::move(intent)),
      language_(std::move(language)),
      origin_(origin),
      trace_(std::move(trace)) {
  if (is_blank(text_)) fail(ErrorKind::kStructural, "sample text is blank");
  if (intent_.empty()) fail(ErrorKind::kStructural, "sample intent is empty");
  if ((origin_ == Origin::kParaphrase) != trace_.has_value()) {
    fail(ErrorKind::kStructural,
         "paraphrase samples need a trace and originals must not have one: '" +
             text_ + "'");
  }
}

IntentDataset::IntentDataset(std::string name, std::string language,
                             std::vector<Sample> samples)
    : name_(std::move(name)),
      language_(std::move(language)),
      samples_(std::move(samples)) {
  if (samples_.empty()) {
    fail(ErrorKind::kStructural, "dataset '" + name_ + "' has no samples");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (s.language() != language_) {
      fail(ErrorKind::kStructural,
           "dataset '" + name_ + "' is '" + language_ + "' but sample " +
               std::to_string(i) + " is '" + s.language() + "'");
    }
    auto [it, inserted] = by_intent_.try_emplace(s.intent());
    if (inserted) intents_.push_back(s.intent());
    it->second.push_back(i);
  }
}

bool IntentDataset::has_intent(std::string_view intent) const {
  return by_intent_.count(std::string(intent)) > 0;
}

const std::vector<std::size_t>& IntentDataset::indices_of(
    std::string_view intent) const {
  auto it = by_intent_.find(std::string(intent));
  if (it == by_intent_.end()) {
    fail(ErrorKind::kCoverage, "dataset '" + name_ + "' has no intent '" +
                                   std::string(intent) + "'");
  }
  return it->second;
}

IntentDataset IntentDataset::renamed(std::string name) const {
  IntentDataset copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

std::map<std::string, IntentDataset> load_clinc(
    const std::filesystem::path& path, std::string_view corpus_name) {
  json root;
  try {
    root = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  if (!root.is_object()) {
    fail(ErrorKind::kParse, path.string() + ": top level must be an object");
  }

  std::map<std::string, IntentDataset> splits;
  for (const auto& [split, entries] : root.items()) {
    if (split.rfind("oos", 0) == 0) continue;
    if (!entries.is_array()) {
      fail(ErrorKind::kParse, "split '" + split + "' is not an array");
    }
    if (entries.empty()) {
      fail(ErrorKind::kStructural, "split '" + split + "' is empty");
    }
    std::vector<Sample> samples;
    samples.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const json& entry = entries[i];
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
          !entry[1].is_string()) {
        fail(ErrorKind::kParse, "split '" + split + "' entry " +
                                    std::to_string(i) +
                                    ": expected [utterance, intent] pair, got " +
                                    entry.dump());
      }
      try {
        samples.emplace_back(entry[0].get<std::string>(),
                             entry[1].get<std::string>(), "en");
      } catch (const Error& e) {
        fail(ErrorKind::kParse, "split '" + split + "' entry " +
                                    std::to_string(i) + ": " + e.what());
      }
    }
    std::string name = std::string(corpus_name) + "-" + split;
    splits.emplace(split, IntentDataset(name, "en", std::move(samples)));
  }
  if (splits.empty()) {
    fail(ErrorKind::kStructural, path.string() + ": no in-scope splits");
  }
  return splits;
}

IntentDataset parse_generic(std::string_view text, std::string name,
                            std::string_view default_language) {
  std::vector<Sample> samples;
  std::optional<std::string> dataset_language;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) continue;

    const std::string where = "line " + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::kParse, where + ": " + e.what());
    }
    if (!record.is_object()) fail(ErrorKind::kParse, where + ": not an object");
    for (const char* key : {"text", "intent"}) {
      if (!record.contains(key) || !record[key].is_string()) {
        fail(ErrorKind::kParse,
             where + ": missing required string field '" + key + "'");
      }
    }
    std::string language = record.value("language", std::string(default_language));
    if (dataset_language && *dataset_language != language) {
      fail(ErrorKind::kStructural, where + ": language '" + language +
                                       "' differs from '" + *dataset_language +
                                       "'");
    }
    dataset_language = language;

    Origin origin = Origin::kOriginal;
    if (record.contains("origin")) {
      origin = parse_origin(record["origin"].get<std::string>(), line_no);
    }
    std::optional<GenerationTrace> trace;
    try {
      if (record.contains("trace") && !record["trace"].is_null()) {
        trace = trace_from_json(record["trace"]);
      }
      samples.emplace_back(record["text"].get<std::string>(),
                           record["intent"].get<std::string>(), language,
                           origin, std::move(trace));
    } catch (const json::exception& e) {
      fail(ErrorKind::kParse, where + ": bad trace: " + e.what());
    } catch (const Error& e) {
      fail(ErrorKind::kParse, where + ": " + e.what());
    }
  }
  if (samples.empty()) {
    fail(ErrorKind::kStructural, "dataset '" + name + "' has no records");
  }
  return IntentDataset(std::move(name), *dataset_language, std::move(samples));
}

IntentDataset load_generic(const std::filesystem::path& path,
                           std::string_view default_language) {
  return parse_generic(read_file(path), path.stem().string(), default_language);
}

std::string to_generic(const IntentDataset& dataset) {
  std::string out;
  for (const Sample& s : dataset.samples()) {
    json record = {{"text", s.text()},
                   {"intent", s.intent()},
                   {"language", s.language()},
                   {"origin", std::string(to_string(s.origin()))}};
    if (s.trace()) record["trace"] = trace_to_json(*s.trace());
    out += record.dump();
    out.push_back('\n');
  }
  return out;
}

void save_generic(const IntentDataset& dataset,
                  const std::filesystem::path& path) {
  write_file_atomic(path, to_generic(dataset));
}

IntentDataset sample_partition(const IntentDataset& dataset,
                               const PartitionSpec& spec) {
  if (spec.k < 1) fail(ErrorKind::kCapacity, "partition size k must be >= 1");

  std::vector<std::string> deficient;
  for (const auto& intent : dataset.intents()) {
    const auto n = dataset.indices_of(intent).size();
    if (n < spec.k) {
      deficient.push_back(intent + " (" + std::to_string(n) + ")");
    }
  }
  if (!deficient.empty()) {
    std::string list;
    for (const auto& d : deficient) list += (list.empty() ? "" : ", ") + d;
    fail(ErrorKind::kCapacity, "intents with fewer than " +
                                   std::to_string(spec.k) +
                                   " samples: " + list);
  }

  std::vector<std::size_t> chosen;
  chosen.reserve(spec.k * dataset.intents().size());
  for (const auto& intent : dataset.intents()) {
    const auto& members = dataset.indices_of(intent);
    SplitMix64 rng = SplitMix64::keyed(spec.seed, intent);
    for (std::size_t pick : choose_sorted(rng, members.size(), spec.k)) {
      chosen.push_back(members[pick]);
    }
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<Sample> samples;
  samples.reserve(chosen.size());
  for (std::size_t i : chosen) samples.push_back(dataset.samples()[i]);
  return IntentDataset(dataset.name() + "-" + std::to_string(spec.k),
                       dataset.language(), std::move(samples));
}

DatasetStats dataset_stats(const IntentDataset& dataset) {
  DatasetStats stats;
  stats.total = dataset.size();
  stats.intents = dataset.intents().size();
  stats.min_per_intent = dataset.size();
  for (const auto& intent : dataset.intents()) {
    const auto n = dataset.indices_of(intent).size();
    stats.min_per_intent = std::min(stats.min_per_intent, n);
    stats.max_per_intent = std::max(stats.max_per_intent, n);
  }
  for (const Sample& s : dataset.samples()) {
    (s.origin() == Origin::kOriginal ? stats.originals : stats.paraphrases)++;
  }
  const auto numerator = static_cast<std::int64_t>(stats.total) * 200 +
                         static_cast<std::int64_t>(stats.intents);
  stats.mean_per_intent_x100 =
      numerator / (2 * static_cast<std::int64_t>(stats.intents));
  return stats;
}

std::string format_hundredths(std::int64_t value_x100) {
  std::ostringstream out;
  if (value_x100 < 0) {
    out << '-';
    value_x100 = -value_x100;
  }
  out << value_x100 / 100 << '.';
  const auto frac = value_x100 % 100;
  if (frac < 10) out << '0';
  out << frac;
  return out.str();
}

}  // namespace paraforge
