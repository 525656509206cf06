#include "paraforge/experiment.h"

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "paraforge/cache.h"
#include "paraforge/corpus.h"
#include "paraforge/curation.h"
#include "paraforge/error.h"
#include "paraforge/http_backend.h"
#include "paraforge/io.h"
#include "paraforge/mock_backend.h"
#include "paraforge/nlu.h"

namespace paraforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

// Whole lines only, so output from concurrent branches never interleaves.
class LineLog {
 public:
  explicit LineLog(std::ostream* out) : out_(out) {}

  void line(const std::string& branch, const std::string& message) {
    if (!out_) return;
    std::lock_guard lock(mu_);
    *out_ << "[" << branch << "] " << message << "\n";
    out_->flush();
  }

 private:
  std::ostream* out_;
  std::mutex mu_;
};

struct LoadedCorpus {
  IntentDataset train;
  IntentDataset test;
  std::size_t raw_train = 0;
};

LoadedCorpus load_corpus(const ExperimentConfig& cfg) {
  if (cfg.corpus_format == "clinc") {
    auto splits = load_clinc(cfg.corpus_path, cfg.corpus_name);
    auto train = splits.find("train");
    auto test = splits.find("test");
    if (train == splits.end() || test == splits.end()) {
      fail(ErrorKind::kStructural, "corpus needs both a train and a test split");
    }
    std::size_t raw = train->second.size();
    return {dedup_originals(train->second), test->second, raw};
  }
  IntentDataset train = load_generic(cfg.corpus_path, cfg.corpus_language);
  if (!cfg.corpus_name.empty()) train = train.renamed(cfg.corpus_name);
  IntentDataset test = load_generic(cfg.test_path, cfg.corpus_language);
  std::size_t raw = train.size();
  return {dedup_originals(train), std::move(test), raw};
}

std::string branch_error(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return std::string(to_string(err->kind())) + ": " + err->what();
  }
  return std::string("internal: ") + e.what();
}

json stage_json(const StageRecord& s) {
  return {{"stage", s.stage}, {"count", s.count}, {"wall_ms", s.wall_ms}};
}

json branch_json(const BranchResult& b) {
  json j = {{"name", b.name},
            {"k", b.k},
            {"backend", b.backend},
            {"status", b.ok ? "ok" : "failed"}};
  if (!b.ok) j["error"] = b.error;
  if (!b.dataset_path.empty()) j["dataset"] = b.dataset_path.string();
  if (!b.model_path.empty()) j["model"] = b.model_path.string();
  if (!b.report_path.empty()) j["report"] = b.report_path.string();
  json stages = json::array();
  for (const auto& s : b.stages) stages.push_back(stage_json(s));
  j["stages"] = std::move(stages);
  return j;
}

}  // namespace

bool ExperimentResult::all_ok() const {
  return std::all_of(branches.begin(), branches.end(),
                     [](const BranchResult& b) { return b.ok; });
}

std::shared_ptr<Backend> make_backend(const BackendDescriptor& d, const fs::path& cache_dir,
                                      bool offline) {
  std::shared_ptr<Backend> inner;
  if (d.is_mock()) {
    inner = std::make_shared<MockBackend>(MockOptions{d.id, d.model_id, d.seed, d.collision_rate});
  } else {
    HttpBackendOptions options;
    options.id = d.id;
    options.model_id = d.model_id;
    options.endpoint = d.endpoint;
    options.token_env = d.token_env;
    options.concurrency = d.concurrency;
    inner = std::make_shared<HttpBackend>(std::move(options));
  }
  return cached(std::move(inner), cache_dir, offline && !d.is_mock());
}

std::string artifact_stem(std::string_view name) {
  std::string out;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '(' || c == ')') continue;
    if (std::isalnum(u) || c == '-' || c == '_' || c == '.') {
      out.push_back(c);
    } else {
      out.push_back('_');
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log_stream) {
  LineLog log(log_stream);
  const auto run_start = Clock::now();

  const fs::path datasets_dir = cfg.output_dir / "datasets";
  const fs::path models_dir = cfg.output_dir / "models";
  const fs::path reports_dir = cfg.output_dir / "reports";
  const fs::path compare_dir = cfg.output_dir / "compare";

  auto load_start = Clock::now();
  LoadedCorpus corpus = load_corpus(cfg);
  const StageRecord load_stage{"load", corpus.train.size() + corpus.test.size(),
                               elapsed_ms(load_start)};
  log.line("corpus", "train " + std::to_string(corpus.raw_train) + " (" +
                         std::to_string(corpus.train.size()) + " after dedup), test " +
                         std::to_string(corpus.test.size()));

  // Backends are shared by every k so the cache and request counts are too.
  std::map<std::string, std::shared_ptr<Backend>> backends;
  for (const auto& d : cfg.backends) {
    backends[d.id] = make_backend(d, cfg.cache_dir, cfg.offline);
  }
  std::map<std::string, std::size_t> label_uses;
  for (const auto& d : cfg.backends) ++label_uses[d.label()];
  auto label_of = [&](const BackendDescriptor& d) {
    return label_uses[d.label()] > 1 ? d.label() + "/" + d.id : d.label();
  };

  std::vector<std::size_t> ks = cfg.k_values;
  if (ks.empty()) ks.push_back(0);

  // Partitions are cheap; build them up front so branches can share them.
  std::map<std::size_t, std::optional<IntentDataset>> partitions;
  std::map<std::size_t, std::exception_ptr> partition_errors;
  std::map<std::size_t, std::int64_t> partition_ms;
  for (std::size_t k : ks) {
    auto start = Clock::now();
    try {
      partitions[k] = k == 0 ? corpus.train
                             : sample_partition(corpus.train, {k, cfg.partition_seed});
    } catch (...) {
      partition_errors[k] = std::current_exception();
      partitions[k] = std::nullopt;
    }
    partition_ms[k] = elapsed_ms(start);
  }

  auto candidates_for = [&](const BackendDescriptor& d, const IntentDataset& base,
                            std::size_t workers) {
    PipelineConfig p = cfg.pipeline;
    p.pivot_language = d.pivot_language;
    p.lm_language = d.lm_language;
    Backend* translator = d.translator.empty() ? nullptr : backends.at(d.translator).get();
    return augment_samples(*backends.at(d.id), base, p, d.method(), workers, translator);
  };

  struct Task {
    std::size_t k;
    const BackendDescriptor* backend;  // null: baseline or union
    bool is_union;
  };
  std::vector<Task> first_phase, second_phase;
  for (std::size_t k : ks) {
    first_phase.push_back({k, nullptr, false});
    for (const auto& d : cfg.backends) first_phase.push_back({k, &d, false});
    if (cfg.union_backends && cfg.backends.size() > 1) second_phase.push_back({k, nullptr, true});
  }

  std::vector<BranchResult> results;
  auto run_task = [&](const Task& task, std::size_t inner_workers) {
    BranchResult r;
    r.k = task.k;
    r.backend = task.is_union ? "union" : task.backend ? task.backend->id : "";
    const IntentDataset* base = partitions.at(task.k) ? &*partitions.at(task.k) : nullptr;
    std::string tag = base ? base->name() : cfg.corpus_name + "-train-" + std::to_string(task.k);
    if (!r.backend.empty()) tag += " + " + r.backend;
    r.name = tag;
    r.stages.push_back({"partition", base ? base->size() : 0, partition_ms.at(task.k)});
    try {
      if (!base) std::rethrow_exception(partition_errors.at(task.k));
      IntentDataset dataset = *base;
      if (task.backend || task.is_union) {
        std::vector<const BackendDescriptor*> sources;
        if (task.backend) {
          sources.push_back(task.backend);
        } else {
          for (const auto& d : cfg.backends) sources.push_back(&d);
        }
        std::map<std::string, std::vector<ParaphraseCandidate>> by_intent;
        std::size_t generated = 0;
        auto start = Clock::now();
        for (const auto* d : sources) {
          log.line(tag, "augmenting " + std::to_string(base->size()) + " samples with " + d->id);
          const auto per_sample = candidates_for(*d, *base, inner_workers);
          for (std::size_t i = 0; i < per_sample.size(); ++i) {
            auto& bucket = by_intent[base->samples()[i].intent()];
            bucket.insert(bucket.end(), per_sample[i].begin(), per_sample[i].end());
            generated += per_sample[i].size();
          }
        }
        r.stages.push_back({"augment", generated, elapsed_ms(start)});

        start = Clock::now();
        std::map<std::string, std::vector<ParaphraseCandidate>> kept;
        std::size_t survivors = 0;
        for (const auto& [intent, candidates] : by_intent) {
          std::vector<Sample> originals;
          for (std::size_t i : base->indices_of(intent)) originals.push_back(base->samples()[i]);
          kept[intent] = dedup(originals, candidates, intent);
          survivors += kept[intent].size();
        }
        r.stages.push_back({"dedup", survivors, elapsed_ms(start)});

        start = Clock::now();
        dataset = assemble(*base, kept, task.is_union ? "union" : label_of(*task.backend));
        r.stages.push_back({"assemble", dataset.size(), elapsed_ms(start)});
      }
      r.name = dataset.name();
      tag = dataset.name();

      const std::string stem = artifact_stem(dataset.name());
      r.dataset_path = datasets_dir / (stem + ".jsonl");
      save_generic(dataset, r.dataset_path);

      auto start = Clock::now();
      log.line(tag, "training on " + std::to_string(dataset.size()) + " samples");
      ClassifierModel model = train(dataset, cfg.train, cfg.features);
      r.stages.push_back({"train", dataset.size(), elapsed_ms(start)});
      r.model_path = models_dir / (stem + ".model");
      save_model(model, r.model_path);

      start = Clock::now();
      EvalReport report = evaluate(model, corpus.test);
      r.stages.push_back({"evaluate", report.samples, elapsed_ms(start)});
      r.row = to_report_row(dataset.name(), report);
      r.report_path = reports_dir / (stem + ".report.csv");
      write_file_atomic(r.report_path, report_csv({*r.row}));
      r.ok = true;
      log.line(tag, "micro " + format_tenths(r.row->tenths[kMicro]) + ", macro F1 " +
                        format_tenths(r.row->tenths[kMacroF1]));
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = branch_error(e);
      log.line(tag, "failed: " + r.error);
    }
    return r;
  };

  auto run_phase = [&](const std::vector<Task>& tasks) {
    std::vector<BranchResult> out(tasks.size());
    const std::size_t threads = std::min(cfg.workers, tasks.size());
    const std::size_t inner = std::max<std::size_t>(1, cfg.workers / std::max<std::size_t>(1, tasks.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) out[i] = run_task(tasks[i], inner);
    };
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    return out;
  };

  for (auto& r : run_phase(first_phase)) results.push_back(std::move(r));
  for (auto& r : run_phase(second_phase)) results.push_back(std::move(r));

  // Comparison tables: baseline first, then backends in config order.
  ExperimentResult result;
  json comparisons = json::array();
  for (std::size_t k : ks) {
    std::vector<ReportRow> rows;
    for (const auto& r : results) {
      if (r.k == k && r.ok) rows.push_back(*r.row);
    }
    const std::string stem = k == 0 ? "all" : "k" + std::to_string(k);
    json entry = {{"k", k}, {"rows", rows.size()}};
    if (rows.size() >= 2) {
      const ComparisonTable table = compare(std::move(rows));
      const fs::path csv = compare_dir / (stem + ".csv");
      write_file_atomic(csv, render_csv(table));
      write_file_atomic(compare_dir / (stem + ".txt"), render_text(table));
      result.comparisons.push_back(csv);
      entry["csv"] = csv.string();
    } else {
      entry["skipped"] = "fewer than two successful branches";
    }
    comparisons.push_back(std::move(entry));
  }

  json seeds = {{"partition", cfg.partition_seed}, {"train", cfg.train.seed}};
  for (const auto& d : cfg.backends) seeds["backend." + d.id] = d.seed;
  json config = json::object();
  for (const auto& [key, value] : cfg.resolved) config[key] = value;
  json branches = json::array();
  for (const auto& r : results) branches.push_back(branch_json(r));
  json backend_stats = json::object();
  for (const auto& [id, b] : backends) {
    if (auto* c = dynamic_cast<CachedBackend*>(b.get())) {
      backend_stats[id] = {{"cache_hits", c->hits()}, {"cache_misses", c->misses()}};
    }
  }

  result.manifest = {
      {"config", std::move(config)},
      {"config_hash", config_hash(cfg.resolved)},
      {"seeds", std::move(seeds)},
      {"corpus",
       {{"train_raw", corpus.raw_train},
        {"train", corpus.train.size()},
        {"test", corpus.test.size()},
        {"intents", corpus.train.intents().size()}}},
      {"stages", json::array({stage_json(load_stage)})},
      {"branches", std::move(branches)},
      {"comparisons", std::move(comparisons)},
      {"backends", std::move(backend_stats)},
      {"wall_ms", elapsed_ms(run_start)},
  };
  result.manifest_path = cfg.output_dir / "manifest.json";
  write_file_atomic(result.manifest_path, result.manifest.dump(2) + "\n");
  result.branches = std::move(results);
  return result;
}

}  // namespace paraforge
