#ifndef PARAFORGE_CORPUS_H_
#define PARAFORGE_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace paraforge {

enum class Origin { kOriginal, kParaphrase };

// Which augmentation procedure produced a paraphrase.
enum class Method { kPivot, kLm };

std::string_view to_string(Origin origin);
std::string_view to_string(Method method);

struct TraceHop {
  std::string source_language;
  std::string target_language;
  int rank = 1;  // rank of the hypothesis kept at this hop

  bool operator==(const TraceHop&) const = default;
};

// Provenance of a generated sample. `pivot_language` is set exactly when
// the text went through a translation round trip (pivot procedure or the
// LM translate-wrap).
struct GenerationTrace {
  std::string backend_id;
  Method method = Method::kPivot;
  std::optional<std::string> pivot_language;
  int rank = 0;
  double score = 0.0;
  std::string source_text;
  std::vector<TraceHop> hops;

  bool operator==(const GenerationTrace&) const = default;
};

// Dataset-matrix label reconstructed from a trace: "NMT-de" for a German
// pivot, "LM" for the paraphrase model (wrapped or not).
std::string dataset_label(const GenerationTrace& trace);

nlohmann::json trace_to_json(const GenerationTrace& trace);
GenerationTrace trace_from_json(const nlohmann::json& json);

class Sample {
 public:
  // Throws Error(kStructural) when the text is blank or when origin and
  // trace disagree.
  Sample(std::string text, std::string intent, std::string language,
         Origin origin = Origin::kOriginal,
         std::optional<GenerationTrace> trace = std::nullopt);

  const std::string& text() const { return text_; }
  const std::string& intent() const { return intent_; }
  const std::string& language() const { return language_; }
  Origin origin() const { return origin_; }
  const std::optional<GenerationTrace>& trace() const { return trace_; }

  bool operator==(const Sample&) const = default;

 private:
  std::string text_;
  std::string intent_;
  std::string language_;
  Origin origin_;
  std::optional<GenerationTrace> trace_;
};

// An ordered, validated collection of samples sharing one language.
// Intents are reported in order of first appearance.
class IntentDataset {
 public:
  IntentDataset(std::string name, std::string language,
                std::vector<Sample> samples);

  const std::string& name() const { return name_; }
  const std::string& language() const { return language_; }
  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

  const std::vector<std::string>& intents() const { return intents_; }
  bool has_intent(std::string_view intent) const;
  // Positions in samples() belonging to `intent`, ascending.
  const std::vector<std::size_t>& indices_of(std::string_view intent) const;

  IntentDataset renamed(std::string name) const;

 private:
  std::string name_;
  std::string language_;
  std::vector<Sample> samples_;
  std::vector<std::string> intents_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_intent_;
};

struct PartitionSpec {
  std::size_t k = 1;
  std::uint64_t seed = 0;
};

// Reads a CLINC150-style JSON file (split name -> [[utterance, intent], ...]).
// Splits named "oos_*" are dropped. Datasets are named "<corpus>-<split>".
std::map<std::string, IntentDataset> load_clinc(
    const std::filesystem::path& path, std::string_view corpus_name = "SCOPE");

// Reads the JSON-lines format. The dataset is named after the file stem.
IntentDataset load_generic(const std::filesystem::path& path,
                           std::string_view default_language = "en");
IntentDataset parse_generic(std::string_view text, std::string name,
                            std::string_view default_language = "en");

std::string to_generic(const IntentDataset& dataset);
void save_generic(const IntentDataset& dataset,
                  const std::filesystem::path& path);

// Draws spec.k samples per intent without replacement. Each intent gets its
// own SplitMix64 stream keyed by (spec.seed, intent label); selected samples
// keep their source order. The result is named "<name>-<k>".
IntentDataset sample_partition(const IntentDataset& dataset,
                               const PartitionSpec& spec);

struct DatasetStats {
  std::size_t total = 0;
  std::size_t intents = 0;
  std::size_t min_per_intent = 0;
  std::size_t max_per_intent = 0;
  // Mean samples per intent in hundredths, rounded half up.
  std::int64_t mean_per_intent_x100 = 0;
  std::size_t originals = 0;
  std::size_t paraphrases = 0;

  double mean_per_intent() const { return mean_per_intent_x100 / 100.0; }
};

DatasetStats dataset_stats(const IntentDataset& dataset);

// "3.65" style rendering of a hundredths value.
std::string format_hundredths(std::int64_t value_x100);

}  // namespace paraforge

#endif  // PARAFORGE_CORPUS_H_
