#ifndef PARAFORGE_CLI_H_
#define PARAFORGE_CLI_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "paraforge/corpus.h"
#include "paraforge/paraphrase.h"

namespace paraforge {

// Entry point behind the `paraforge` binary. Returns the process exit code.
// Failures print one line "error: <kind>: <message>" to `err`; usage errors
// use kind "usage" and exit code 2, every other failure exits with 1.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Candidate file: one JSON object per line with keys intent, source, text,
// score, rank, trace.
std::string candidates_to_jsonl(
    const std::vector<std::pair<std::string, ParaphraseCandidate>>& candidates);
std::vector<std::pair<std::string, ParaphraseCandidate>> parse_candidates(
    std::string_view text);

// Reads either corpus format. "auto" picks CLINC for ".json" files and the
// JSON-lines format otherwise; `split` selects the CLINC split.
IntentDataset read_dataset(const std::filesystem::path& path, std::string_view format = "auto",
                           std::string_view split = "train", std::string_view language = "en");

}  // namespace paraforge

#endif  // PARAFORGE_CLI_H_
