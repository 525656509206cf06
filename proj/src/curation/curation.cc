#include "paraforge/curation.h"

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "paraforge/error.h"
#include "paraforge/io.h"
#include "paraforge/rng.h"

namespace paraforge {

NormalizedKey normalize(std::string_view text) {
  icu::UnicodeString folded = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  folded.foldCase(U_FOLD_CASE_DEFAULT);

  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (int32_t i = 0; i < folded.length();) {
    const UChar32 c = folded.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (U_GET_GC_MASK(c) & U_GC_P_MASK) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    U8_APPEND_UNSAFE(buf, len, c);
    out.append(buf, static_cast<std::size_t>(len));
  }
  return {std::move(out)};
}

std::vector<ParaphraseCandidate> dedup(
    const std::vector<Sample>& originals,
    const std::vector<ParaphraseCandidate>& candidates, std::string_view intent) {
  std::set<NormalizedKey> seen;
  for (const Sample& s : originals) {
    if (s.intent() == intent) seen.insert(normalize(s.text()));
  }
  std::vector<ParaphraseCandidate> kept;
  for (const auto& c : candidates) {
    if (seen.insert(normalize(c.text)).second) kept.push_back(c);
  }
  return kept;
}

IntentDataset dedup_originals(const IntentDataset& dataset) {
  std::set<std::pair<std::string, NormalizedKey>> seen;
  std::vector<Sample> kept;
  for (const Sample& s : dataset.samples()) {
    if (seen.emplace(s.intent(), normalize(s.text())).second) kept.push_back(s);
  }
  return IntentDataset(dataset.name(), dataset.language(), std::move(kept));
}

std::map<std::string, std::vector<std::string>> cross_intent_duplicates(
    const IntentDataset& dataset) {
  std::map<std::string, std::vector<std::string>> intents_by_key;
  for (const Sample& s : dataset.samples()) {
    auto& list = intents_by_key[normalize(s.text()).key];
    if (std::find(list.begin(), list.end(), s.intent()) == list.end()) {
      list.push_back(s.intent());
    }
  }
  std::erase_if(intents_by_key, [](const auto& kv) { return kv.second.size() < 2; });
  return intents_by_key;
}

std::string augmented_name(std::string_view base_name, std::string_view label) {
  std::string name(base_name);
  const std::string_view marker = "-train";
  const auto at = name.find(marker);
  if (at != std::string::npos) {
    name.replace(at, marker.size(), "-paraph");
  } else {
    name += "-paraph";
  }
  return name + " (" + std::string(label) + ")";
}

IntentDataset assemble(
    const IntentDataset& base,
    const std::map<std::string, std::vector<ParaphraseCandidate>>& kept,
    std::string label) {
  for (const auto& [intent, candidates] : kept) {
    if (!base.has_intent(intent)) {
      fail(ErrorKind::kStructural, "candidates for unknown intent '" + intent +
                                       "' in '" + base.name() + "'");
    }
    if (label.empty() && !candidates.empty()) {
      label = dataset_label(candidates.front().trace);
    }
  }

  std::vector<Sample> samples = base.samples();
  std::size_t added = 0;
  for (const auto& intent : base.intents()) {
    auto it = kept.find(intent);
    if (it == kept.end()) continue;
    std::set<NormalizedKey> keys;
    for (std::size_t i : base.indices_of(intent)) {
      keys.insert(normalize(base.samples()[i].text()));
    }
    for (const auto& c : it->second) {
      if (!keys.insert(normalize(c.text)).second) {
        fail(ErrorKind::kStructural, "candidate '" + c.text + "' for intent '" +
                                         intent + "' duplicates an existing sample");
      }
      samples.emplace_back(c.text, intent, base.language(), Origin::kParaphrase,
                           c.trace);
      ++added;
    }
  }
  if (added == 0 && label.empty()) return base;

  IntentDataset augmented(augmented_name(base.name(), label), base.language(),
                          std::move(samples));
  for (const auto& [key, intents] : cross_intent_duplicates(augmented)) {
    std::string list;
    for (const auto& i : intents) list += (list.empty() ? "" : ", ") + i;
    spdlog::warn("'{}' appears under several intents in '{}': {}", key,
                 augmented.name(), list);
  }
  return augmented;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kCorrect: return "correct";
    case Verdict::kIncorrect: return "incorrect";
    case Verdict::kUnreviewed: return "unreviewed";
  }
  return "unreviewed";
}

std::vector<ReviewRecord> review_sample(const IntentDataset& augmented,
                                        double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorKind::kConfig, "review fraction must be in (0, 1]");
  }
  std::vector<const Sample*> paraphrases;
  for (const Sample& s : augmented.samples()) {
    if (s.origin() == Origin::kParaphrase) paraphrases.push_back(&s);
  }
  const auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(paraphrases.size()) - 1e-9));
  SplitMix64 rng = SplitMix64::keyed(seed, "review");
  std::vector<ReviewRecord> rows;
  for (std::size_t i : choose_sorted(rng, paraphrases.size(), count)) {
    const Sample& s = *paraphrases[i];
    rows.push_back({s.text(), s.trace()->source_text, s.intent(),
                    Verdict::kUnreviewed, ""});
  }
  return rows;
}

std::string to_review_csv(const std::vector<ReviewRecord>& records) {
  std::string out = csv_row({"candidate", "source", "intent", "verdict", "annotator"});
  for (const auto& r : records) {
    out += csv_row({r.candidate, r.source, r.intent,
                    std::string(to_string(r.verdict)), r.annotator});
  }
  return out;
}

void export_review_sheet(const IntentDataset& augmented, double fraction,
                         std::uint64_t seed, const std::filesystem::path& path) {
  write_file(path, to_review_csv(review_sample(augmented, fraction, seed)));
}

std::vector<ReviewRecord> parse_review_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  const std::vector<std::string> header = {"candidate", "source", "intent",
                                           "verdict", "annotator"};
  if (rows.empty() || rows.front().fields != header) {
    fail(ErrorKind::kParse,
         "row 1: expected header candidate,source,intent,verdict,annotator");
  }
  std::vector<ReviewRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    const std::string where = "row " + std::to_string(r + 1) + " (line " +
                              std::to_string(rows[r].line) + ")";
    if (fields.size() != header.size()) {
      fail(ErrorKind::kParse, where + ": expected 5 fields, got " +
                                  std::to_string(fields.size()));
    }
    std::string verdict;
    for (char c : fields[3]) {
      if (c != ' ' && c != '\t') {
        verdict.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    ReviewRecord record{fields[0], fields[1], fields[2], Verdict::kUnreviewed,
                        fields[4]};
    if (verdict == "correct") {
      record.verdict = Verdict::kCorrect;
    } else if (verdict == "incorrect") {
      record.verdict = Verdict::kIncorrect;
    } else if (verdict != "unreviewed" && !verdict.empty()) {
      fail(ErrorKind::kParse, where + ": unknown verdict '" + fields[3] + "'");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string AcceptRate::percent() const {
  if (reviewed == 0) return "0.0";
  // Tenths of a percent, half up, in exact integer arithmetic.
  const std::uint64_t tenths = (2000 * correct + reviewed) / (2 * reviewed);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

ReviewReport summarize_review(const std::vector<ReviewRecord>& records) {
  ReviewReport report;
  for (const auto& r : records) {
    if (r.verdict == Verdict::kUnreviewed) {
      ++report.unreviewed;
      continue;
    }
    const bool ok = r.verdict == Verdict::kCorrect;
    for (AcceptRate* rate : {&report.pooled, &report.per_annotator[r.annotator]}) {
      ++rate->reviewed;
      if (ok) ++rate->correct;
    }
  }
  if (report.pooled.reviewed == 0) fail(ErrorKind::kStructural, "no reviewed rows");
  return report;
}

IntentDataset drop_rejected(const IntentDataset& augmented,
                            const std::vector<ReviewRecord>& records) {
  std::set<std::pair<std::string, std::string>> rejected;
  for (const auto& r : records) {
    if (r.verdict == Verdict::kIncorrect) rejected.emplace(r.intent, r.candidate);
  }
  std::vector<Sample> kept;
  for (const Sample& s : augmented.samples()) {
    if (s.origin() == Origin::kParaphrase &&
        rejected.count({s.intent(), s.text()})) {
      continue;
    }
    kept.push_back(s);
  }
  return IntentDataset(augmented.name(), augmented.language(), std::move(kept));
}

ImportedReview import_review(const std::filesystem::path& sheet,
                             const IntentDataset* augmented) {
  const auto records = parse_review_csv(read_file(sheet));
  ImportedReview out{summarize_review(records), std::nullopt};
  if (augmented) out.filtered = drop_rejected(*augmented, records);
  return out;
}

}  // namespace paraforge
