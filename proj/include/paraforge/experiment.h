#ifndef PARAFORGE_EXPERIMENT_H_
#define PARAFORGE_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "paraforge/config.h"
#include "paraforge/evalkit.h"
#include "paraforge/paraphrase.h"

namespace paraforge {

struct StageRecord {
  std::string stage;
  std::size_t count = 0;  // samples produced by the stage
  std::int64_t wall_ms = 0;
};

struct BranchResult {
  std::string name;      // dataset name, e.g. "SCOPE-paraph-5 (LM)"
  std::size_t k = 0;     // 0: whole train split
  std::string backend;   // empty for the baseline, "union" for the union branch
  bool ok = false;
  std::string error;     // "<kind>: <message>" when !ok
  std::filesystem::path dataset_path;
  std::filesystem::path model_path;
  std::filesystem::path report_path;
  std::optional<ReportRow> row;
  std::vector<StageRecord> stages;
};

struct ExperimentResult {
  std::vector<BranchResult> branches;
  std::vector<std::filesystem::path> comparisons;
  std::filesystem::path manifest_path;
  nlohmann::json manifest;

  bool all_ok() const;
};

// Builds the backend named by a descriptor, wrapped in the on-disk cache.
// Mock descriptors never touch the network and ignore `offline`.
std::shared_ptr<Backend> make_backend(const BackendDescriptor& descriptor,
                                      const std::filesystem::path& cache_dir,
                                      bool offline);

// File-name form of a dataset name: spaces become '_', brackets vanish.
std::string artifact_stem(std::string_view dataset_name);

// For each k: partition the deduplicated train split, then train and
// evaluate a baseline and one augmented model per backend against the fixed
// test split. A failing branch is recorded and the others continue. Progress
// lines go to `log` prefixed with the branch name.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace paraforge

#endif  // PARAFORGE_EXPERIMENT_H_
