#ifndef PARAFORGE_CONFIG_H_
#define PARAFORGE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "paraforge/nlu.h"
#include "paraforge/paraphrase.h"

namespace paraforge {

// Flat view of a TOML-style file: "[a.b]" headers followed by "key = value"
// lines become "a.b.key". Values are strings (basic or literal), integers,
// floats, booleans, or single-line arrays of those. '#' starts a comment.
using ConfigValues = std::map<std::string, nlohmann::json>;

ConfigValues parse_config_text(std::string_view text);
ConfigValues load_config_file(const std::filesystem::path& path);

// Scalar/array literal as it would appear on the right of '='. Bare words
// that are not valid literals come back as strings.
nlohmann::json parse_config_value(std::string_view literal);

struct BackendDescriptor {
  std::string id;
  std::string kind;            // "pivot", "lm", or "mock" (LM procedure, mock transport)
  std::string pivot_language;  // pivot only
  std::string lm_language = "en";
  std::string endpoint = "mock";  // "mock" or an http(s) URL
  std::string model_id;
  std::string token_env;
  std::string translator;  // id of the backend doing the LM translate-wrap
  std::size_t concurrency = 1;
  std::uint64_t seed = 0;  // mock only
  double collision_rate = 0.0;  // mock only

  Method method() const { return kind == "pivot" ? Method::kPivot : Method::kLm; }
  bool is_mock() const { return endpoint == "mock"; }
  // Dataset-matrix label: "NMT-de" or "LM".
  std::string label() const;
};

struct ExperimentConfig {
  std::filesystem::path corpus_path;
  std::string corpus_format = "clinc";  // "clinc" or "generic"
  std::string corpus_name;              // default: "SCOPE" / file stem
  std::filesystem::path test_path;      // generic corpora only
  std::string corpus_language = "en";

  std::vector<std::size_t> k_values;    // empty: use the whole train split
  std::uint64_t partition_seed = 0;

  std::vector<BackendDescriptor> backends;
  PipelineConfig pipeline;
  TrainConfig train;
  VocabConfig features;

  std::filesystem::path output_dir = "runs/out";
  std::filesystem::path cache_dir = "runs/cache";
  std::size_t workers = 1;
  bool offline = false;
  bool union_backends = false;

  // Every resolved value, including defaults. Recorded in the manifest.
  ConfigValues resolved;
};

// Validates and resolves a flat config. Relative paths are taken relative to
// `base_dir`. Unknown keys, unknown backend kinds, and an output directory
// equal to the cache directory are config errors.
ExperimentConfig resolve_experiment(ConfigValues values,
                                    const std::filesystem::path& base_dir = {});

// Canonical JSON of the resolved values and its SHA-256.
std::string config_hash(const ConfigValues& resolved);

}  // namespace paraforge

#endif  // PARAFORGE_CONFIG_H_
