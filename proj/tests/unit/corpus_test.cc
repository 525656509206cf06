#include <algorithm>
#include <functional>
#include <set>
#include <map>

#include "doctest.h"
#include "json.hpp"
#include "paraforge/corpus.h"
#include "paraforge/error.h"
#include "paraforge/io.h"
#include "support.h"

using namespace paraforge;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected an error");
  return {};
}

std::multiset<std::pair<std::string, std::string>> pairs(const IntentDataset& d) {
  std::multiset<std::pair<std::string, std::string>> out;
  for (const auto& s : d.samples()) out.emplace(s.text(), s.intent());
  return out;
}

}  // namespace

TEST_CASE("sample invariants") {
  CHECK(kind_of([] { Sample("   ", "greet", "en"); }) == ErrorKind::kStructural);
  CHECK(kind_of([] { Sample("hi", "", "en"); }) == ErrorKind::kStructural);
  CHECK(kind_of([] { Sample("hi", "greet", "en", Origin::kParaphrase); }) ==
        ErrorKind::kStructural);
  GenerationTrace trace;
  trace.backend_id = "mock";
  CHECK(kind_of([&] { Sample("hi", "greet", "en", Origin::kOriginal, trace); }) ==
        ErrorKind::kStructural);
  Sample ok("hi", "greet", "en", Origin::kParaphrase, trace);
  CHECK(ok.trace()->backend_id == "mock");
}

TEST_CASE("dataset invariants") {
  CHECK(kind_of([] { IntentDataset("d", "en", {}); }) == ErrorKind::kStructural);
  CHECK(kind_of([] {
          IntentDataset("d", "en", {Sample("hi", "a", "en"), Sample("salut", "a", "fr")});
        }) == ErrorKind::kStructural);
  const auto d = testing::make_dataset({{"x", "b"}, {"y", "a"}, {"z", "b"}});
  CHECK(d.intents() == std::vector<std::string>{"b", "a"});
  CHECK(d.indices_of("b") == std::vector<std::size_t>{0, 2});
  CHECK(kind_of([&] { d.indices_of("missing"); }) == ErrorKind::kCoverage);
}

TEST_CASE("load_clinc reads in-scope splits and drops oos ones") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "data.json", 150, 100, 20, 30);
  const auto splits = load_clinc(dir / "data.json");
  CHECK(splits.size() == 3);
  CHECK(splits.count("oos_train") == 0);
  const auto& train = splits.at("train");
  CHECK(train.name() == "SCOPE-train");
  CHECK(train.size() == 15000);
  CHECK(train.intents().size() == 150);
  CHECK(train.language() == "en");
  const auto stats = dataset_stats(train);
  CHECK(stats.min_per_intent == 100);
  CHECK(stats.max_per_intent == 100);
  CHECK(splits.at("test").size() == 4500);
  for (const auto& s : train.samples()) CHECK(s.origin() == Origin::kOriginal);
}

TEST_CASE("load_clinc minimal file") {
  testing::TempDir dir;
  write_file(dir / "m.json", R"({"train": [["hi", "greet"]]})");
  const auto splits = load_clinc(dir / "m.json");
  REQUIRE(splits.count("train") == 1);
  CHECK(splits.at("train").size() == 1);
  CHECK(splits.at("train").intents().size() == 1);
}

TEST_CASE("load_clinc errors name the problem") {
  testing::TempDir dir;
  write_file(dir / "bad.json", R"({"train": [["hi", "greet"], ["oops"]]})");
  CHECK(kind_of([&] { load_clinc(dir / "bad.json"); }) == ErrorKind::kParse);
  const std::string msg = message_of([&] { load_clinc(dir / "bad.json"); });
  CHECK(msg.find("train") != std::string::npos);
  CHECK(msg.find("1") != std::string::npos);

  write_file(dir / "empty.json", R"({"train": [], "test": [["a", "b"]]})");
  CHECK(kind_of([&] { load_clinc(dir / "empty.json"); }) == ErrorKind::kStructural);

  write_file(dir / "junk.json", "not json");
  CHECK(kind_of([&] { load_clinc(dir / "junk.json"); }) == ErrorKind::kParse);
}

TEST_CASE("load_generic") {
  testing::TempDir dir;
  SUBCASE("records with defaults") {
    write_file(dir / "HOUSE-train.jsonl",
               "{\"text\": \"bonjour\", \"intent\": \"greet\", \"language\": \"fr\"}\n"
               "\n"
               "{\"text\": \"au revoir\", \"intent\": \"bye\", \"language\": \"fr\"}\n");
    const auto d = load_generic(dir / "HOUSE-train.jsonl");
    CHECK(d.name() == "HOUSE-train");
    CHECK(d.language() == "fr");
    CHECK(d.size() == 2);
  }
  SUBCASE("zero records") {
    write_file(dir / "empty.jsonl", "\n\n");
    CHECK(kind_of([&] { load_generic(dir / "empty.jsonl"); }) == ErrorKind::kStructural);
  }
  SUBCASE("missing intent cites line 1") {
    write_file(dir / "bad.jsonl", "{\"text\": \"hi\"}\n");
    CHECK(kind_of([&] { load_generic(dir / "bad.jsonl"); }) == ErrorKind::kParse);
    CHECK(message_of([&] { load_generic(dir / "bad.jsonl"); }).find("line 1") !=
          std::string::npos);
  }
  SUBCASE("house-shaped file") {
    save_generic(testing::house_shaped_dataset(), dir / "house.jsonl");
    const auto d = load_generic(dir / "house.jsonl");
    CHECK(d.size() == 73);
    CHECK(d.intents().size() == 20);
  }
}

TEST_CASE("paraphrase records keep their traces through the generic format") {
  GenerationTrace trace{"nmt", Method::kPivot, "de", 3, -1.25, "I must go", {{"en", "de", 1}, {"de", "en", 3}}};
  const IntentDataset d("x", "en",
                        {Sample("I must go", "leave", "en"),
                         Sample("I have to go", "leave", "en", Origin::kParaphrase, trace)});
  const auto back = parse_generic(to_generic(d), "x");
  CHECK(back.samples() == d.samples());
  CHECK(dataset_label(*back.samples()[1].trace()) == "NMT-de");
}

TEST_CASE("clinc to generic and back preserves the (text, intent) multiset") {
  testing::TempDir dir;
  for (std::size_t intents : {1, 3, 17}) {
    testing::write_clinc_file(dir / "c.json", intents, 4 + intents % 3, 1, 2);
    const auto splits = load_clinc(dir / "c.json");
    for (const auto& [name, d] : splits) {
      save_generic(d, dir / (name + ".jsonl"));
      CHECK(pairs(load_generic(dir / (name + ".jsonl"))) == pairs(d));
    }
  }
}

TEST_CASE("sample_partition counts on a CLINC-shaped corpus") {
  testing::TempDir dir;
  testing::write_clinc_file(dir / "c.json", 150, 100, 1, 1);
  const auto train = load_clinc(dir / "c.json").at("train");
  CHECK(sample_partition(train, {5, 7}).size() == 750);
  CHECK(sample_partition(train, {10, 7}).size() == 1500);
  const auto p50 = sample_partition(train, {50, 7});
  CHECK(p50.size() == 7500);
  CHECK(p50.name() == "SCOPE-train-50");
}

TEST_CASE("sample_partition properties over random datasets") {
  std::mt19937_64 gen(42);
  for (int round = 0; round < 60; ++round) {
    const std::size_t intents = 1 + gen() % 8;
    std::vector<std::pair<std::string, std::string>> rows;
    std::size_t min_count = SIZE_MAX;
    for (std::size_t i = 0; i < intents; ++i) {
      const std::size_t n = 1 + gen() % 12;
      min_count = std::min(min_count, n);
      for (std::size_t j = 0; j < n; ++j) {
        rows.emplace_back("text " + std::to_string(i) + " " + std::to_string(j),
                          "intent" + std::to_string(i));
      }
    }
    std::shuffle(rows.begin(), rows.end(), gen);
    const auto d = testing::make_dataset(rows);
    const std::size_t k = 1 + gen() % min_count;
    const std::uint64_t seed = gen();

    const auto a = sample_partition(d, {k, seed});
    const auto b = sample_partition(d, {k, seed});
    CHECK(a.samples() == b.samples());
    CHECK(to_generic(a) == to_generic(b));
    CHECK(a.size() == k * intents);
    for (const auto& intent : d.intents()) CHECK(a.indices_of(intent).size() == k);

    const auto source = pairs(d);
    for (const auto& s : a.samples()) CHECK(source.count({s.text(), s.intent()}) == 1);

    // Selected samples keep their source order.
    std::vector<std::size_t> positions;
    for (const auto& s : a.samples()) {
      auto it = std::find_if(d.samples().begin(), d.samples().end(),
                             [&](const Sample& x) { return x.text() == s.text(); });
      positions.push_back(static_cast<std::size_t>(it - d.samples().begin()));
    }
    CHECK(std::is_sorted(positions.begin(), positions.end()));
  }
}

TEST_CASE("sampling every sample returns the same set") {
  const auto d = testing::house_shaped_dataset();
  const auto grouped = testing::make_dataset({{"a", "x"}, {"b", "x"}, {"c", "y"}, {"d", "y"}});
  const auto all = sample_partition(grouped, {2, 99});
  CHECK(pairs(all) == pairs(grouped));
  CHECK(kind_of([&] { sample_partition(d, {4, 1}); }) == ErrorKind::kCapacity);
}

TEST_CASE("adding an intent does not change other intents' draws") {
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 10; ++i) rows.emplace_back("a" + std::to_string(i), "alpha");
  for (int i = 0; i < 10; ++i) rows.emplace_back("b" + std::to_string(i), "beta");
  const auto before = sample_partition(testing::make_dataset(rows), {3, 5});
  for (int i = 0; i < 10; ++i) rows.emplace_back("c" + std::to_string(i), "gamma");
  const auto after = sample_partition(testing::make_dataset(rows), {3, 5});
  for (const std::string intent : {"alpha", "beta"}) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(before.samples()[before.indices_of(intent)[j]].text() ==
            after.samples()[after.indices_of(intent)[j]].text());
    }
  }
}

TEST_CASE("capacity error lists deficient intents") {
  const auto d = testing::make_dataset({{"a", "x"}, {"b", "x"}, {"c", "y"}});
  const std::string msg = message_of([&] { sample_partition(d, {2, 0}); });
  CHECK(msg.find("y (1)") != std::string::npos);
  CHECK(msg.find("x (") == std::string::npos);
}

TEST_CASE("dataset_stats") {
  SUBCASE("house shape") {
    const auto s = dataset_stats(testing::house_shaped_dataset());
    CHECK(s.total == 73);
    CHECK(s.intents == 20);
    CHECK(s.min_per_intent == 3);
    CHECK(s.max_per_intent == 6);
    // 73 / 20 = 3.65 exactly; two decimals keep it.
    CHECK(s.mean_per_intent_x100 == 365);
    CHECK(format_hundredths(s.mean_per_intent_x100) == "3.65");
  }
  SUBCASE("single sample") {
    const auto s = dataset_stats(testing::make_dataset({{"hi", "greet"}}));
    CHECK(s.min_per_intent == 1);
    CHECK(s.max_per_intent == 1);
    CHECK(format_hundredths(s.mean_per_intent_x100) == "1.00");
  }
  SUBCASE("one and two") {
    const auto s = dataset_stats(testing::make_dataset({{"a", "x"}, {"b", "y"}, {"c", "y"}}));
    CHECK(format_hundredths(s.mean_per_intent_x100) == "1.50");
  }
  SUBCASE("half-up at the third decimal") {
    // 3 intents, 2+2+1 = 5 samples: 1.6666... -> 1.67; 8 intents, 13: 1.625 -> 1.63
    std::vector<std::pair<std::string, std::string>> rows = {
        {"a", "x"}, {"b", "x"}, {"c", "y"}, {"d", "y"}, {"e", "z"}};
    CHECK(dataset_stats(testing::make_dataset(rows)).mean_per_intent_x100 == 167);
    rows.clear();
    for (int i = 0; i < 8; ++i) rows.emplace_back("t" + std::to_string(i), "i" + std::to_string(i));
    for (int i = 0; i < 5; ++i) rows.emplace_back("u" + std::to_string(i), "i" + std::to_string(i));
    CHECK(dataset_stats(testing::make_dataset(rows)).mean_per_intent_x100 == 163);
  }
}
