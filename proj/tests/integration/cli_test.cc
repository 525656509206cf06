#include <cstdlib>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "paraforge/cli.h"
#include "paraforge/corpus.h"
#include "paraforge/error.h"
#include "paraforge/experiment.h"
#include "paraforge/io.h"
#include "paraforge/nlu.h"
#include "support.h"

using namespace paraforge;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& path) { return path.string(); }

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

std::string experiment_config(const fs::path& corpus, const std::string& extra = "") {
  return "[corpus]\npath = \"" + corpus.string() +
         "\"\n"
         "[partition]\nk = [2, 3]\nseed = 7\n"
         "[train]\nepochs = 20\n"
         "[backend.lm]\nkind = \"mock\"\nseed = 1\n"
         "[backend.de]\nkind = \"pivot\"\npivot_language = \"de\"\n"
         "[output]\ndir = \"out\"\n"
         "[cache]\ndir = \"cache\"\n" +
         extra;
}

}  // namespace

TEST_CASE("usage errors exit with 2 and one parsable line") {
  const auto r = cli({"partition"});
  CHECK(r.code == 2);
  CHECK(std::regex_match(r.err, std::regex("error: usage: .*\n")));
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("module errors surface as kind-tagged lines") {
  testing::TempDir dir;
  const auto r = cli({"load-stats", p(dir / "missing.jsonl")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: io: ", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("subcommands chain through the documented file formats") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "clinc.json", 150, 100, 2, 3);
  const std::string before = read_file(dir / "clinc.json");

  auto stats = cli({"load-stats", p(dir / "clinc.json")});
  REQUIRE(stats.code == 0);
  CHECK(stats.out.find("SCOPE-train\ttotal=15000\tintents=150") != std::string::npos);

  auto part = cli({"partition", p(dir / "clinc.json"), "--k", "5", "--seed", "7", "--out",
                   p(dir / "out" / "p5.jsonl")});
  REQUIRE(part.code == 0);
  CHECK(load_generic(dir / "out" / "p5.jsonl").size() == 750);

  // Same partition twice is byte-identical.
  REQUIRE(cli({"partition", p(dir / "clinc.json"), "--k", "5", "--seed", "7", "--out",
               p(dir / "out" / "p5b.jsonl")})
              .code == 0);
  CHECK(read_file(dir / "out" / "p5.jsonl") == read_file(dir / "out" / "p5b.jsonl"));

  auto aug = cli({"augment", p(dir / "out" / "p5.jsonl"), "--backend", "mock", "--offline",
                  "--cache-dir", p(dir / "cache"), "--out", p(dir / "out" / "cands.jsonl")});
  REQUIRE(aug.code == 0);
  CHECK(aug.out == "candidates\t4500\n");
  const auto cands = parse_candidates(read_file(dir / "out" / "cands.jsonl"));
  CHECK(cands.size() == 4500);

  auto dd = cli({"dedup", p(dir / "out" / "p5.jsonl"), p(dir / "out" / "cands.jsonl"), "--out",
                 p(dir / "out" / "aug.jsonl")});
  REQUIRE(dd.code == 0);
  const auto augmented = load_generic(dir / "out" / "aug.jsonl");
  CHECK(dataset_stats(augmented).paraphrases == 4500);

  REQUIRE(cli({"train", p(dir / "out" / "p5.jsonl"), "--epochs", "10", "--out",
               p(dir / "out" / "base.model")})
              .code == 0);
  auto ev = cli({"eval", p(dir / "out" / "base.model"), p(dir / "clinc.json"), "--system", "base",
                 "--out", p(dir / "out" / "base.csv")});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.rfind("system,micro,macro_f1,macro_precision,macro_recall,n\r\nbase,", 0) == 0);
  CHECK(ev.out.find(",450\r\n") != std::string::npos);

  REQUIRE(cli({"train", p(dir / "out" / "aug.jsonl"), "--epochs", "10", "--out",
               p(dir / "out" / "aug.model")})
              .code == 0);
  REQUIRE(cli({"eval", p(dir / "out" / "aug.model"), p(dir / "clinc.json"), "--out",
               p(dir / "out" / "aug.csv")})
              .code == 0);
  auto cmp = cli({"compare", p(dir / "out" / "base.csv"), p(dir / "out" / "aug.csv")});
  REQUIRE(cmp.code == 0);
  CHECK(cmp.out.rfind("system,micro,macro_f1,macro_precision,macro_recall,n,best\r\n", 0) == 0);
  CHECK(cmp.out.find("\r\naug,") != std::string::npos);

  auto rx = cli({"review-export", p(dir / "out" / "aug.jsonl"), "--fraction", "0.01", "--seed",
                 "3", "--out", p(dir / "out" / "sheet.csv")});
  REQUIRE(rx.code == 0);
  CHECK(rx.out == "rows\t45\n");

  // Mark every row correct except the first.
  auto rows = parse_csv(read_file(dir / "out" / "sheet.csv"));
  std::string filled = csv_row(rows[0].fields);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    auto f = rows[i].fields;
    f[3] = i == 1 ? "incorrect" : "correct";
    f[4] = "ann";
    filled += csv_row(f);
  }
  write_file(dir / "out" / "filled.csv", filled);
  auto ri = cli({"review-import", p(dir / "out" / "filled.csv"), "--dataset",
                 p(dir / "out" / "aug.jsonl"), "--out", p(dir / "out" / "filtered.jsonl")});
  REQUIRE(ri.code == 0);
  CHECK(ri.out.find("pooled\t97.8\t44/45") != std::string::npos);
  CHECK(load_generic(dir / "out" / "filtered.jsonl").size() == augmented.size() - 1);

  // Inputs are never touched.
  CHECK(read_file(dir / "clinc.json") == before);
}

TEST_CASE("augment with an unreachable remote backend fails offline without network") {
  testing::TempDir dir;
  save_generic(testing::make_dataset({{"hi there", "greet"}, {"bye now", "leave"}}),
               dir / "d.jsonl");
  auto r = cli({"augment", p(dir / "d.jsonl"), "--backend", "remote", "--endpoint",
                "http://127.0.0.1:1/x", "--offline", "--cache-dir", p(dir / "cache"), "--out",
                p(dir / "c.jsonl")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: transport: ", 0) == 0);
}

TEST_CASE("run produces the dataset matrix, comparisons and manifest") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "clinc.json", 6, 5, 1, 2);
  write_file(dir / "exp.toml", experiment_config(dir / "clinc.json"));
  auto r = cli({"run", "--config", p(dir / "exp.toml"), "--workers", "3"});
  INFO(r.err);
  REQUIRE(r.code == 0);

  const auto out = dir / "out";
  for (const std::string name :
       {"SCOPE-train-2", "SCOPE-paraph-2_LM", "SCOPE-paraph-2_NMT-de", "SCOPE-train-3",
        "SCOPE-paraph-3_LM", "SCOPE-paraph-3_NMT-de"}) {
    CHECK(fs::exists(out / "datasets" / (name + ".jsonl")));
    CHECK(fs::exists(out / "models" / (name + ".model")));
    CHECK(fs::exists(out / "reports" / (name + ".report.csv")));
  }
  for (const std::string k : {"k2", "k3"}) {
    const auto rows = parse_csv(read_file(out / "compare" / (k + ".csv")));
    CHECK(rows.size() == 4);
    CHECK(fs::exists(out / "compare" / (k + ".txt")));
  }
  CHECK(load_generic(out / "datasets" / "SCOPE-paraph-2_LM.jsonl").size() == 6 * 2 * 7);

  const json manifest = json::parse(read_file(out / "manifest.json"));
  CHECK(manifest["config_hash"].get<std::string>().size() == 64);
  CHECK(manifest["seeds"]["partition"] == 7);
  CHECK(manifest["seeds"]["backend.lm"] == 1);
  CHECK(manifest["config"]["train.epochs"] == 20);
  CHECK(manifest["branches"].size() == 6);
  for (const auto& b : manifest["branches"]) {
    CHECK(b["status"] == "ok");
    CHECK(b["stages"].size() >= (b["backend"] == "" ? 3u : 6u));
  }
  CHECK(manifest["corpus"]["test"] == 12);
}

TEST_CASE("the manifest is enough to rerun a branch") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "clinc.json", 4, 5, 1, 2);
  write_file(dir / "exp.toml", experiment_config(dir / "clinc.json"));
  REQUIRE(cli({"run", "--config", p(dir / "exp.toml")}).code == 0);
  const json manifest = json::parse(read_file(dir / "out" / "manifest.json"));

  ConfigValues values;
  for (const auto& [key, value] : manifest["config"].items()) values[key] = value;
  values["output.dir"] = (dir / "rerun").string();
  const auto cfg = resolve_experiment(values);
  run_experiment(cfg);
  for (const std::string f : {"datasets/SCOPE-paraph-3_NMT-de.jsonl", "models/SCOPE-train-2.model",
                              "reports/SCOPE-paraph-2_LM.report.csv"}) {
    CHECK(read_file(dir / "rerun" / f) == read_file(dir / "out" / f));
  }
}

TEST_CASE("dotted overrides, seed override and the cache variable") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "clinc.json", 3, 4, 1, 2);
  write_file(dir / "exp.toml", experiment_config(dir / "clinc.json"));
  ::setenv("PARAFORGE_CACHE", (dir / "envcache").c_str(), 1);
  auto r = cli({"run", "--config", p(dir / "exp.toml"), "--seed", "99", "--train.epochs=3",
                "--partition.k", "[2]", "--output.dir", p(dir / "o2")});
  ::unsetenv("PARAFORGE_CACHE");
  INFO(r.err);
  REQUIRE(r.code == 0);
  const json manifest = json::parse(read_file(dir / "o2" / "manifest.json"));
  CHECK(manifest["config"]["train.epochs"] == 3);
  CHECK(manifest["config"]["partition.k"] == json::array({2}));
  CHECK(manifest["seeds"]["partition"] == 99);
  CHECK(manifest["seeds"]["train"] == 99);
  CHECK(manifest["seeds"]["backend.de"] == 99);
  CHECK(manifest["config"]["cache.dir"] == (dir / "envcache").string());
  CHECK(fs::exists(dir / "envcache"));
  CHECK(manifest["branches"].size() == 3);

  auto bad = cli({"run", "--config", p(dir / "exp.toml"), "--train.epochz=3"});
  CHECK(bad.code == 1);
  CHECK(bad.err.rfind("error: config: ", 0) == 0);
}

TEST_CASE("unknown backend kinds are rejected before any output") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "clinc.json", 3, 4, 1, 2);
  write_file(dir / "exp.toml",
             experiment_config(dir / "clinc.json", "[backend.x]\nkind = \"oracle\"\n"));
  auto r = cli({"run", "--config", p(dir / "exp.toml")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: config: ", 0) == 0);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("a failing branch is recorded and the others finish") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "clinc.json", 3, 4, 1, 2);
  write_file(dir / "exp.toml",
             experiment_config(dir / "clinc.json",
                               "[backend.remote]\nkind = \"lm\"\nendpoint = "
                               "\"http://127.0.0.1:1/x\"\nmodel_id = \"m\"\n"));
  auto r = cli({"run", "--config", p(dir / "exp.toml"), "--offline"});
  CHECK(r.code == 1);
  const json manifest = json::parse(read_file(dir / "out" / "manifest.json"));
  std::size_t failed = 0, ok = 0;
  for (const auto& b : manifest["branches"]) {
    if (b["status"] == "failed") {
      ++failed;
      CHECK(b["backend"] == "remote");
      CHECK(b["error"].get<std::string>().rfind("transport: ", 0) == 0);
    } else {
      ++ok;
    }
  }
  CHECK(failed == 2);
  CHECK(ok == 6);
  CHECK(fs::exists(dir / "out" / "compare" / "k2.csv"));
}

TEST_CASE("a partition the corpus cannot fill fails only its own branches") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "clinc.json", 3, 4, 1, 2);
  write_file(dir / "exp.toml", experiment_config(dir / "clinc.json"));
  auto r = cli({"run", "--config", p(dir / "exp.toml"), "--partition.k=[2, 9]"});
  CHECK(r.code == 1);
  const json manifest = json::parse(read_file(dir / "out" / "manifest.json"));
  for (const auto& b : manifest["branches"]) {
    if (b["k"] == 9) {
      CHECK(b["status"] == "failed");
      CHECK(b["error"].get<std::string>().rfind("capacity: ", 0) == 0);
    } else {
      CHECK(b["status"] == "ok");
    }
  }
}

TEST_CASE("union branch combines backends") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "clinc.json", 3, 4, 1, 2);
  write_file(dir / "exp.toml", experiment_config(dir / "clinc.json", "[run]\nunion = true\n"));
  REQUIRE(cli({"run", "--config", p(dir / "exp.toml")}).code == 0);
  const auto u = load_generic(dir / "out" / "datasets" / "SCOPE-paraph-2_union.jsonl");
  const auto lm = load_generic(dir / "out" / "datasets" / "SCOPE-paraph-2_LM.jsonl");
  CHECK(u.size() >= lm.size());
}

TEST_CASE("generic corpora need a test file") {
  testing::TempDir dir;
  save_generic(testing::house_shaped_dataset(), dir / "HOUSE-train.jsonl");
  save_generic(testing::house_shaped_dataset().renamed("HOUSE-test"), dir / "HOUSE-test.jsonl");
  write_file(dir / "exp.toml",
             "[corpus]\nformat = \"generic\"\npath = \"HOUSE-train.jsonl\"\n"
             "[train]\nepochs = 5\n"
             "[backend.fr]\nkind = \"mock\"\n[output]\ndir = \"out\"\n");
  CHECK(cli({"run", "--config", p(dir / "exp.toml")}).code == 1);
  write_file(dir / "exp.toml",
             "[corpus]\nformat = \"generic\"\npath = \"HOUSE-train.jsonl\"\n"
             "test_path = \"HOUSE-test.jsonl\"\nlanguage = \"fr\"\n"
             "[train]\nepochs = 5\n"
             "[backend.lm]\nkind = \"mock\"\n[output]\ndir = \"out\"\n");
  auto r = cli({"run", "--config", p(dir / "exp.toml")});
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "out" / "datasets" / "HOUSE-train.jsonl"));
  CHECK(fs::exists(dir / "out" / "datasets" / "HOUSE-paraph_LM.jsonl"));
}
