#ifndef PARAFORGE_CURATION_H_
#define PARAFORGE_CURATION_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paraforge/corpus.h"
#include "paraforge/paraphrase.h"

namespace paraforge {

// Identity of a text for deduplication and featurization.
struct NormalizedKey {
  std::string key;

  auto operator<=>(const NormalizedKey&) const = default;
};

// Unicode full case folding, removal of every general-category P*
// character, whitespace runs collapsed to one space, ends trimmed.
// Idempotent. Diacritics are kept.
NormalizedKey normalize(std::string_view text);

// Drops candidates whose key matches an original of `intent`, then keeps
// only the first candidate for each remaining key. Survivors keep their
// input order. Originals of other intents are ignored.
std::vector<ParaphraseCandidate> dedup(const std::vector<Sample>& originals,
                                       const std::vector<ParaphraseCandidate>& candidates,
                                       std::string_view intent);

// Removes repeated originals (same intent, same key), keeping the first.
IntentDataset dedup_originals(const IntentDataset& dataset);

// Texts (by key) that occur under more than one intent, with those intents.
std::map<std::string, std::vector<std::string>> cross_intent_duplicates(
    const IntentDataset& dataset);

// "SCOPE-train-5" + "LM" -> "SCOPE-paraph-5 (LM)"; names without "-train"
// get "-paraph (<label>)" appended.
std::string augmented_name(std::string_view base_name, std::string_view label);

// Base samples followed, intent by intent in base order, by the kept
// candidates as paraphrase samples. `label` names the result; when empty it
// is taken from the candidates' traces. Throws Error(kStructural) for an
// intent missing from `base` or a candidate colliding with an existing key.
IntentDataset assemble(
    const IntentDataset& base,
    const std::map<std::string, std::vector<ParaphraseCandidate>>& kept,
    std::string label = {});

enum class Verdict { kCorrect, kIncorrect, kUnreviewed };

std::string_view to_string(Verdict verdict);

struct ReviewRecord {
  std::string candidate;
  std::string source;
  std::string intent;
  Verdict verdict = Verdict::kUnreviewed;
  std::string annotator;
};

// A seeded sample of ceil(fraction * N) paraphrase rows, in dataset order.
// Requires 0 < fraction <= 1.
std::vector<ReviewRecord> review_sample(const IntentDataset& augmented,
                                        double fraction, std::uint64_t seed);

// CSV with header candidate,source,intent,verdict,annotator.
std::string to_review_csv(const std::vector<ReviewRecord>& records);
void export_review_sheet(const IntentDataset& augmented, double fraction,
                         std::uint64_t seed, const std::filesystem::path& path);

// Throws Error(kParse) with the row number on a bad verdict or header.
std::vector<ReviewRecord> parse_review_csv(std::string_view text);

struct AcceptRate {
  std::size_t correct = 0;
  std::size_t reviewed = 0;

  double rate() const { return reviewed ? double(correct) / double(reviewed) : 0.0; }
  // Percentage with one decimal, rounded half up: "82.0".
  std::string percent() const;
};

struct ReviewReport {
  AcceptRate pooled;
  std::map<std::string, AcceptRate> per_annotator;
  std::size_t unreviewed = 0;
};

// Throws Error(kStructural, "no reviewed rows") when nothing was reviewed.
ReviewReport summarize_review(const std::vector<ReviewRecord>& records);

struct ImportedReview {
  ReviewReport report;
  std::optional<IntentDataset> filtered;
};

// Reads a filled-in sheet. With `augmented`, also returns that dataset minus
// paraphrases any reviewer marked incorrect.
ImportedReview import_review(const std::filesystem::path& sheet,
                             const IntentDataset* augmented = nullptr);

IntentDataset drop_rejected(const IntentDataset& augmented,
                            const std::vector<ReviewRecord>& records);

}  // namespace paraforge

#endif  // PARAFORGE_CURATION_H_
