#ifndef PARAFORGE_MOCK_BACKEND_H_
#define PARAFORGE_MOCK_BACKEND_H_

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "paraforge/paraphrase.h"

namespace paraforge {

// Groups of interchangeable phrases (lower case, single spaces) the mock
// substitutes for one another.
const std::vector<std::vector<std::string>>& mock_synonym_groups();

// Deterministic offline stand-in for translation and paraphrase models.
//
// Translation (source != target) marks text as "foreign" with a "<xx> "
// prefix; translating marked text back to the language it was marked from
// strips the prefix. Rank 1 of a translation is the faithful rendering and
// ranks 2.. are variants, so round trips reproduce the familiar "best
// back-translation equals the input" behaviour. Monolingual requests return
// variants only.
//
// Variants come from, in rank order: synonym substitutions, contraction and
// determiner toggles, bounded adjacent-word swaps, pairs of those edits, and
// finally courtesy prefixes/suffixes, which never run out. With
// collision_rate > 0 a variant slot is, with that probability, replaced by a
// case/punctuation-only copy of the input or an earlier hypothesis so that
// normalization-based dedup has something to remove.
//
// Scores are synthetic log-probability-like values, strictly decreasing.
// Output is a pure function of (request, seed, collision_rate).
BackendResponse mock_generate(const BackendRequest& request, std::uint64_t seed,
                              double collision_rate = 0.0);

struct MockOptions {
  std::string id = "mock";
  std::string model_id = "mock-v1";
  std::uint64_t seed = 0;
  double collision_rate = 0.0;
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockOptions options = {}) : options_(std::move(options)) {}

  const std::string& id() const override { return options_.id; }
  const std::string& model_id() const override { return options_.model_id; }
  BackendResponse generate(const BackendRequest& request) override;

  std::uint64_t calls() const { return calls_.load(); }

 private:
  MockOptions options_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace paraforge

#endif  // PARAFORGE_MOCK_BACKEND_H_
