#ifndef PARAFORGE_PARAPHRASE_H_
#define PARAFORGE_PARAPHRASE_H_

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "paraforge/corpus.h"

namespace paraforge {

struct Hypothesis {
  std::string text;
  double score = 0.0;  // backend-assigned, higher is better
  int rank = 0;        // 1-based position in the response

  bool operator==(const Hypothesis&) const = default;
};

// Equal source and target languages request a monolingual paraphrase.
struct BackendRequest {
  std::string text;
  std::string source_language;
  std::string target_language;
  int num_hypotheses = 1;
};

struct BackendResponse {
  std::vector<Hypothesis> hypotheses;

  bool operator==(const BackendResponse&) const = default;
};

// Wire/cache body: {"hypotheses": [{"text": ..., "score": ...}, ...]}.
// Ranks are implied by order and reassigned on parse.
nlohmann::json response_to_json(const BackendResponse& response);
BackendResponse response_from_json(const nlohmann::json& json);

// A translation or paraphrase model. Implementations must be safe to call
// from several threads unless concurrency_limit() returns 1.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const std::string& id() const = 0;
  virtual const std::string& model_id() const = 0;
  // Maximum in-flight requests; 0 means unbounded.
  virtual std::size_t concurrency_limit() const { return 0; }
  virtual BackendResponse generate(const BackendRequest& request) = 0;
};

// Calls the backend and enforces the response contract: at most
// num_hypotheses entries and non-increasing scores. Ranks are renumbered
// 1..m. An empty response is returned as-is; callers decide whether that
// is fatal.
BackendResponse checked_generate(Backend& backend, const BackendRequest& request);

struct PipelineConfig {
  int n_keep = 6;
  std::string pivot_language;       // pivot procedure only
  std::string lm_language = "en";   // language the paraphrase model speaks
  int forward_beam = 1;
  int backward_beam = 7;            // must leave n_keep after dropping rank 1

  // Throws Error(kConfig) if the settings are unusable for `method`.
  void validate(Method method) const;
};

struct ParaphraseCandidate {
  std::string text;
  double score = 0.0;
  int rank = 0;
  GenerationTrace trace;
};

// Round trip through cfg.pivot_language: keep the best forward translation,
// request cfg.backward_beam back-translations, always discard rank 1 and
// return the next cfg.n_keep.
std::vector<ParaphraseCandidate> pivot_paraphrase(Backend& backend,
                                                  const Sample& sample,
                                                  const PipelineConfig& cfg);

// Paraphrase with a monolingual model. Samples in another language are
// translated into cfg.lm_language first (best hypothesis), paraphrased, and
// each paraphrase translated back (best hypothesis). `translator` defaults
// to `lm`. A failed back-translation drops that one candidate with a
// warning.
std::vector<ParaphraseCandidate> lm_paraphrase(Backend& lm, const Sample& sample,
                                               const PipelineConfig& cfg,
                                               Backend* translator = nullptr);

// Runs one procedure over every sample of a dataset, fanning out across up
// to `workers` threads (capped by the backend's concurrency limit). The
// result is aligned with dataset.samples(). The first failing sample, in
// dataset order, has its error rethrown.
std::vector<std::vector<ParaphraseCandidate>> augment_samples(
    Backend& backend, const IntentDataset& dataset, const PipelineConfig& cfg,
    Method method, std::size_t workers = 1, Backend* translator = nullptr);

}  // namespace paraforge

#endif  // PARAFORGE_PARAPHRASE_H_
