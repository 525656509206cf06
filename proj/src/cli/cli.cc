#include "paraforge/cli.h"

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "paraforge/cache.h"
#include "paraforge/config.h"
#include "paraforge/curation.h"
#include "paraforge/error.h"
#include "paraforge/evalkit.h"
#include "paraforge/experiment.h"
#include "paraforge/io.h"
#include "paraforge/nlu.h"

namespace paraforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string candidates_to_jsonl(
    const std::vector<std::pair<std::string, ParaphraseCandidate>>& candidates) {
  std::string out;
  for (const auto& [intent, c] : candidates) {
    json line = {{"intent", intent},
                 {"source", c.trace.source_text},
                 {"text", c.text},
                 {"score", c.score},
                 {"rank", c.rank},
                 {"trace", trace_to_json(c.trace)}};
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<std::pair<std::string, ParaphraseCandidate>> parse_candidates(std::string_view text) {
  std::vector<std::pair<std::string, ParaphraseCandidate>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      ParaphraseCandidate c;
      c.text = j.at("text").get<std::string>();
      c.score = j.at("score").get<double>();
      c.rank = j.at("rank").get<int>();
      c.trace = trace_from_json(j.at("trace"));
      out.emplace_back(j.at("intent").get<std::string>(), std::move(c));
    } catch (const json::exception& e) {
      fail(ErrorKind::kParse, "candidates line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

IntentDataset read_dataset(const fs::path& path, std::string_view format, std::string_view split,
                           std::string_view language) {
  const bool clinc = format == "clinc" || (format == "auto" && path.extension() == ".json");
  if (!clinc) return load_generic(path, language);
  auto splits = load_clinc(path);
  auto it = splits.find(std::string(split));
  if (it == splits.end()) {
    fail(ErrorKind::kStructural, "corpus has no split '" + std::string(split) + "'");
  }
  return it->second;
}

namespace {

struct DatasetArgs {
  std::string path;
  std::string format = "auto";
  std::string split = "train";
  std::string language = "en";

  void attach(CLI::App* cmd, const std::string& name = "dataset") {
    cmd->add_option(name, path, "Dataset file")->required();
    cmd->add_option("--format", format, "auto, clinc or generic")
        ->check(CLI::IsMember({"auto", "clinc", "generic"}));
    cmd->add_option("--split", split, "CLINC split to read");
    cmd->add_option("--language", language, "Language of a generic dataset");
  }
  IntentDataset load() const { return read_dataset(path, format, split, language); }
};

std::string stats_line(const IntentDataset& d) {
  const DatasetStats s = dataset_stats(d);
  return d.name() + "\ttotal=" + std::to_string(s.total) + "\tintents=" +
         std::to_string(s.intents) + "\tmin=" + std::to_string(s.min_per_intent) +
         "\tmax=" + std::to_string(s.max_per_intent) +
         "\tmean=" + format_hundredths(s.mean_per_intent_x100) +
         "\toriginals=" + std::to_string(s.originals) +
         "\tparaphrases=" + std::to_string(s.paraphrases);
}

fs::path cache_dir_or(const std::string& flag, const fs::path& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PARAFORGE_CACHE"); env && *env) return env;
  return fallback;
}

bool is_path_key(const std::string& key) {
  return key == "corpus.path" || key == "corpus.test_path" || key == "output.dir" ||
         key == "cache.dir";
}

// "--a.b=v" or "--a.b v" pairs left over after flag parsing.
void apply_overrides(const std::vector<std::string>& extras, ConfigValues& values) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.find('.') == std::string::npos) {
      fail(ErrorKind::kConfig, "unexpected argument '" + arg + "'");
    }
    std::string key = arg.substr(2);
    std::string value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < extras.size()) {
      value = extras[++i];
    } else {
      fail(ErrorKind::kConfig, "override '" + arg + "' has no value");
    }
    json parsed = parse_config_value(value);
    if (is_path_key(key) && parsed.is_string()) {
      parsed = fs::absolute(parsed.get<std::string>()).string();
    }
    values[key] = std::move(parsed);
  }
}

void apply_seed(ConfigValues& values, std::uint64_t seed) {
  values["partition.seed"] = seed;
  values["train.seed"] = seed;
  std::vector<std::string> seed_keys;
  for (const auto& [key, value] : values) {
    if (key.rfind("backend.", 0) == 0 && key.size() > 5 &&
        key.compare(key.size() - 5, 5, ".kind") == 0) {
      seed_keys.push_back(key.substr(0, key.size() - 5) + ".seed");
    }
  }
  for (const auto& key : seed_keys) values[key] = seed;
}

int usage_error(std::ostream& err, const std::string& message) {
  err << "error: usage: " << message << "\n";
  return 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Paraphrase-based augmentation of intent classification data", "paraforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "paraforge 0.1.0");

  // load-stats
  DatasetArgs stats_in;
  auto* stats_cmd = app.add_subcommand("load-stats", "Print dataset statistics");
  stats_cmd->add_option("dataset", stats_in.path, "Dataset file")->required();
  stats_cmd->add_option("--format", stats_in.format)->check(CLI::IsMember({"auto", "clinc", "generic"}));
  stats_cmd->add_option("--language", stats_in.language);

  // partition
  DatasetArgs part_in;
  std::size_t part_k = 0;
  std::uint64_t part_seed = 0;
  std::string part_out;
  auto* part_cmd = app.add_subcommand("partition", "Sample k examples per intent");
  part_in.attach(part_cmd);
  part_cmd->add_option("--k", part_k, "Samples per intent")->required()->check(CLI::PositiveNumber);
  part_cmd->add_option("--seed", part_seed, "Sampling seed");
  part_cmd->add_option("--out", part_out, "Output dataset (JSON lines)")->required();

  // augment
  DatasetArgs aug_in;
  std::string aug_backend = "mock", aug_config, aug_out, aug_cache, aug_method = "lm";
  std::string aug_pivot, aug_endpoint;
  std::uint64_t aug_seed = 0;
  double aug_collision = 0.0;
  int aug_n_keep = 6;
  int aug_backward = 0;
  std::size_t aug_workers = 1;
  bool aug_offline = false;
  auto* aug_cmd = app.add_subcommand("augment", "Generate paraphrase candidates");
  aug_in.attach(aug_cmd);
  aug_cmd->add_option("--backend", aug_backend, "Backend id (from --config, or 'mock')");
  aug_cmd->add_option("--config", aug_config, "Config file describing backends");
  aug_cmd->add_option("--method", aug_method, "pivot or lm, for a backend not in a config")
      ->check(CLI::IsMember({"pivot", "lm"}));
  aug_cmd->add_option("--pivot-language", aug_pivot);
  aug_cmd->add_option("--endpoint", aug_endpoint, "http(s) URL; default is the mock");
  aug_cmd->add_option("--seed", aug_seed, "Mock backend seed");
  aug_cmd->add_option("--collision-rate", aug_collision, "Mock near-duplicate rate");
  aug_cmd->add_option("--n-keep", aug_n_keep, "Paraphrases kept per sample");
  aug_cmd->add_option("--backward-beam", aug_backward, "Backward beam (default n-keep + 1)");
  aug_cmd->add_option("--workers", aug_workers);
  aug_cmd->add_option("--cache-dir", aug_cache);
  aug_cmd->add_flag("--offline", aug_offline, "Forbid network; cache misses fail");
  aug_cmd->add_option("--out", aug_out, "Candidate file (JSON lines)")->required();

  // dedup
  DatasetArgs dedup_in;
  std::string dedup_candidates, dedup_out, dedup_label;
  auto* dedup_cmd = app.add_subcommand("dedup", "Deduplicate candidates and assemble");
  dedup_in.attach(dedup_cmd);
  dedup_cmd->add_option("candidates", dedup_candidates, "Candidate file")->required();
  dedup_cmd->add_option("--label", dedup_label, "Dataset label, e.g. LM or NMT-fr");
  dedup_cmd->add_option("--out", dedup_out, "Augmented dataset (JSON lines)")->required();

  // train
  DatasetArgs train_in;
  TrainConfig train_cfg;
  VocabConfig vocab_cfg;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "Train an intent classifier");
  train_in.attach(train_cmd);
  train_cmd->add_option("--epochs", train_cfg.epochs);
  train_cmd->add_option("--learning-rate", train_cfg.learning_rate);
  train_cmd->add_option("--batch-size", train_cfg.batch_size);
  train_cmd->add_option("--l2", train_cfg.l2);
  train_cmd->add_option("--seed", train_cfg.seed);
  train_cmd->add_option("--min-n", vocab_cfg.min_n);
  train_cmd->add_option("--max-n", vocab_cfg.max_n);
  train_cmd->add_option("--min-count", vocab_cfg.min_count);
  train_cmd->add_option("--out", train_out, "Model file")->required();

  // eval
  std::string eval_model, eval_out, eval_system;
  DatasetArgs eval_in;
  eval_in.split = "test";
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a test set");
  eval_cmd->add_option("model", eval_model, "Model file")->required();
  eval_in.attach(eval_cmd, "test");
  eval_cmd->add_option("--system", eval_system, "Row name (default: model file stem)");
  eval_cmd->add_option("--out", eval_out, "Report file (CSV)");

  // compare
  std::vector<std::string> compare_reports;
  bool compare_text = false;
  auto* compare_cmd = app.add_subcommand("compare", "Compare report files");
  compare_cmd->add_option("reports", compare_reports, "Report files")->required();
  compare_cmd->add_flag("--text", compare_text, "Aligned text instead of CSV");

  // review-export
  DatasetArgs rx_in;
  double rx_fraction = 0.1;
  std::uint64_t rx_seed = 0;
  std::string rx_out;
  auto* rx_cmd = app.add_subcommand("review-export", "Write a review sheet");
  rx_in.attach(rx_cmd);
  rx_cmd->add_option("--fraction", rx_fraction, "Share of paraphrases to review");
  rx_cmd->add_option("--seed", rx_seed);
  rx_cmd->add_option("--out", rx_out, "Review sheet (CSV)")->required();

  // review-import
  std::string ri_sheet, ri_dataset, ri_out;
  auto* ri_cmd = app.add_subcommand("review-import", "Summarize a filled-in review sheet");
  ri_cmd->add_option("sheet", ri_sheet, "Review sheet")->required();
  ri_cmd->add_option("--dataset", ri_dataset, "Augmented dataset to filter");
  ri_cmd->add_option("--out", ri_out, "Filtered dataset (needs --dataset)");

  // run
  std::string run_config;
  std::size_t run_workers = 0;
  bool run_offline = false;
  std::optional<std::uint64_t> run_seed;
  std::string run_cache;
  auto* run_cmd = app.add_subcommand("run", "Run a full experiment from a config file");
  run_cmd->add_option("--config", run_config, "Config file")->required();
  run_cmd->add_option("--workers", run_workers, "Concurrent branches");
  run_cmd->add_flag("--offline", run_offline, "Forbid network; cache misses fail");
  run_cmd->add_option("--seed", run_seed, "Override every seed");
  run_cmd->add_option("--cache-dir", run_cache);
  run_cmd->allow_extras();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "paraforge 0.1.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    return usage_error(err, e.what());
  }

  try {
    if (*stats_cmd) {
      const bool clinc = stats_in.format == "clinc" ||
                         (stats_in.format == "auto" && fs::path(stats_in.path).extension() == ".json");
      if (clinc) {
        for (const auto& [split, d] : load_clinc(stats_in.path)) out << stats_line(d) << "\n";
      } else {
        out << stats_line(load_generic(stats_in.path, stats_in.language)) << "\n";
      }
    } else if (*part_cmd) {
      IntentDataset p = sample_partition(part_in.load(), {part_k, part_seed});
      save_generic(p, part_out);
      out << stats_line(p) << "\n";
    } else if (*aug_cmd) {
      BackendDescriptor d;
      PipelineConfig pipeline;
      fs::path cache_dir = "runs/cache";
      if (!aug_config.empty()) {
        ConfigValues values = load_config_file(aug_config);
        values.emplace("corpus.path", aug_in.path);
        const ExperimentConfig cfg =
            resolve_experiment(std::move(values), fs::path(aug_config).parent_path());
        auto it = std::find_if(cfg.backends.begin(), cfg.backends.end(),
                               [&](const BackendDescriptor& b) { return b.id == aug_backend; });
        if (it == cfg.backends.end()) {
          fail(ErrorKind::kConfig, "config has no backend '" + aug_backend + "'");
        }
        d = *it;
        pipeline = cfg.pipeline;
        cache_dir = cfg.cache_dir;
        if (!d.translator.empty()) {
          fail(ErrorKind::kConfig, "translator chains are only supported by 'run'");
        }
      } else {
        d.id = aug_backend;
        d.kind = aug_method;
        d.pivot_language = aug_pivot;
        d.endpoint = aug_endpoint.empty() ? "mock" : aug_endpoint;
        d.model_id = d.is_mock() ? "mock-v1" : aug_backend;
        d.seed = aug_seed;
        d.collision_rate = aug_collision;
        pipeline.n_keep = aug_n_keep;
        pipeline.backward_beam = aug_backward > 0 ? aug_backward : aug_n_keep + 1;
      }
      pipeline.pivot_language = d.pivot_language;
      pipeline.lm_language = d.lm_language;
      auto backend = make_backend(d, cache_dir_or(aug_cache, cache_dir), aug_offline);
      const IntentDataset dataset = aug_in.load();
      const auto per_sample =
          augment_samples(*backend, dataset, pipeline, d.method(), aug_workers);
      std::vector<std::pair<std::string, ParaphraseCandidate>> flat;
      for (std::size_t i = 0; i < per_sample.size(); ++i) {
        for (const auto& c : per_sample[i]) flat.emplace_back(dataset.samples()[i].intent(), c);
      }
      write_file_atomic(aug_out, candidates_to_jsonl(flat));
      out << "candidates\t" << flat.size() << "\n";
    } else if (*dedup_cmd) {
      const IntentDataset base = dedup_in.load();
      const auto flat = parse_candidates(read_file(dedup_candidates));
      std::map<std::string, std::vector<ParaphraseCandidate>> by_intent;
      for (const auto& [intent, c] : flat) by_intent[intent].push_back(c);
      std::map<std::string, std::vector<ParaphraseCandidate>> kept;
      for (const auto& [intent, candidates] : by_intent) {
        if (!base.has_intent(intent)) {
          fail(ErrorKind::kStructural, "candidate intent '" + intent + "' is not in the dataset");
        }
        std::vector<Sample> originals;
        for (std::size_t i : base.indices_of(intent)) originals.push_back(base.samples()[i]);
        kept[intent] = dedup(originals, candidates, intent);
      }
      const IntentDataset augmented = assemble(base, kept, dedup_label);
      save_generic(augmented, dedup_out);
      out << stats_line(augmented) << "\n";
    } else if (*train_cmd) {
      const ClassifierModel model = train(train_in.load(), train_cfg, vocab_cfg);
      save_model(model, train_out);
      out << "labels\t" << model.labels().size() << "\tfeatures\t"
          << model.vocabulary().dimension() << "\tfinal_loss\t" << model.final_loss() << "\n";
    } else if (*eval_cmd) {
      const ClassifierModel model = load_model(eval_model);
      const EvalReport report = evaluate(model, eval_in.load());
      const std::string system =
          eval_system.empty() ? fs::path(eval_model).stem().string() : eval_system;
      const std::string csv = report_csv({to_report_row(system, report)});
      if (!eval_out.empty()) write_file_atomic(eval_out, csv);
      out << csv;
    } else if (*compare_cmd) {
      std::vector<ReportRow> rows;
      for (const auto& path : compare_reports) {
        for (auto& row : parse_report_csv(read_file(path))) rows.push_back(std::move(row));
      }
      const ComparisonTable table = compare(std::move(rows));
      out << (compare_text ? render_text(table) : render_csv(table));
    } else if (*rx_cmd) {
      const auto records = review_sample(rx_in.load(), rx_fraction, rx_seed);
      write_file_atomic(rx_out, to_review_csv(records));
      out << "rows\t" << records.size() << "\n";
    } else if (*ri_cmd) {
      if (!ri_out.empty() && ri_dataset.empty()) {
        return usage_error(err, "--out requires --dataset");
      }
      std::optional<IntentDataset> augmented;
      if (!ri_dataset.empty()) augmented = read_dataset(ri_dataset);
      const ImportedReview imported =
          import_review(ri_sheet, augmented ? &*augmented : nullptr);
      const ReviewReport& r = imported.report;
      out << "pooled\t" << r.pooled.percent() << "\t" << r.pooled.correct << "/"
          << r.pooled.reviewed << "\n";
      for (const auto& [annotator, rate] : r.per_annotator) {
        out << "annotator\t" << annotator << "\t" << rate.percent() << "\t" << rate.correct
            << "/" << rate.reviewed << "\n";
      }
      out << "unreviewed\t" << r.unreviewed << "\n";
      if (!ri_out.empty() && imported.filtered) save_generic(*imported.filtered, ri_out);
    } else if (*run_cmd) {
      ConfigValues values = load_config_file(run_config);
      apply_overrides(run_cmd->remaining(), values);
      if (const char* env = std::getenv("PARAFORGE_CACHE"); env && *env) {
        values["cache.dir"] = fs::absolute(env).string();
      }
      if (!run_cache.empty()) values["cache.dir"] = fs::absolute(run_cache).string();
      if (run_workers > 0) values["run.workers"] = run_workers;
      if (run_offline) values["run.offline"] = true;
      if (run_seed) apply_seed(values, *run_seed);
      const ExperimentConfig cfg =
          resolve_experiment(std::move(values), fs::path(run_config).parent_path());
      const ExperimentResult result = run_experiment(cfg, &err);
      for (const auto& b : result.branches) {
        out << (b.ok ? "ok" : "failed") << "\t" << b.name;
        if (b.row) {
          out << "\tmicro=" << format_tenths(b.row->tenths[kMicro])
              << "\tmacro_f1=" << format_tenths(b.row->tenths[kMacroF1]);
        }
        if (!b.ok) out << "\t" << b.error;
        out << "\n";
      }
      out << "manifest\t" << result.manifest_path.string() << "\n";
      return result.all_ok() ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace paraforge
