#include "paraforge/config.h"

#include <cctype>
#include <charconv>
#include <set>

#include "paraforge/error.h"
#include "paraforge/io.h"

namespace paraforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Cuts a trailing comment, respecting quotes.
std::string_view strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

std::optional<json> parse_scalar(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.size() >= 2 && s.front() == '\'' && s.back() == '\'') {
    return json(std::string(s.substr(1, s.size() - 2)));
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      char c = s[i];
      if (c == '\\' && i + 2 < s.size()) {
        switch (s[++i]) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: return std::nullopt;
        }
      } else {
        out.push_back(c);
      }
    }
    return json(out);
  }
  if (s == "true") return json(true);
  if (s == "false") return json(false);

  std::string digits;
  for (char c : s) {
    if (c != '_') digits.push_back(c);
  }
  const char* first = digits.data();
  const char* last = digits.data() + digits.size();
  if (!digits.empty() && digits.front() == '+') ++first;
  std::int64_t integer = 0;
  if (auto [p, ec] = std::from_chars(first, last, integer); ec == std::errc() && p == last) {
    return json(integer);
  }
  if (digits.front() != '-') {
    std::uint64_t big = 0;
    if (auto [p, ec] = std::from_chars(first, last, big); ec == std::errc() && p == last) {
      return json(big);
    }
  }
  double real = 0.0;
  if (auto [p, ec] = std::from_chars(first, last, real); ec == std::errc() && p == last) {
    return json(real);
  }
  return std::nullopt;
}

std::optional<json> parse_literal(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    json array = json::array();
    std::string_view body = trim(s.substr(1, s.size() - 2));
    std::size_t start = 0;
    char quote = 0;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      const char c = i < body.size() ? body[i] : ',';
      if (quote) {
        if (c == quote) quote = 0;
        continue;
      }
      if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == ',') {
        std::string_view item = trim(body.substr(start, i - start));
        start = i + 1;
        if (item.empty()) {
          if (i >= body.size()) break;  // trailing comma
          return std::nullopt;
        }
        auto value = parse_scalar(item);
        if (!value) return std::nullopt;
        array.push_back(std::move(*value));
      }
    }
    return array;
  }
  return parse_scalar(s);
}

template <typename T>
T get_as(const ConfigValues& values, const std::string& key, T fallback) {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return it->second.get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::kConfig, "'" + key + "' has the wrong type: " + it->second.dump());
  }
}

}  // namespace

json parse_config_value(std::string_view literal) {
  if (auto value = parse_literal(literal)) return *value;
  return json(std::string(trim(literal)));
}

ConfigValues parse_config_text(std::string_view text) {
  ConfigValues values;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(strip_comment(text.substr(pos, end - pos)));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::kConfig, where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) fail(ErrorKind::kConfig, where + ": bad section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorKind::kConfig, where + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) fail(ErrorKind::kConfig, where + ": bad key '" + key + "'");
    auto value = parse_literal(line.substr(eq + 1));
    if (!value) fail(ErrorKind::kConfig, where + ": cannot parse value for '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!values.emplace(full, std::move(*value)).second) {
      fail(ErrorKind::kConfig, where + ": duplicate key '" + full + "'");
    }
  }
  return values;
}

ConfigValues load_config_file(const fs::path& path) {
  return parse_config_text(read_file(path));
}

std::string BackendDescriptor::label() const {
  return method() == Method::kPivot ? "NMT-" + pivot_language : "LM";
}

ExperimentConfig resolve_experiment(ConfigValues values, const fs::path& base_dir) {
  static const std::set<std::string> kTopLevel = {
      "corpus.path",          "corpus.format",          "corpus.name",
      "corpus.test_path",     "corpus.language",        "partition.k",
      "partition.seed",       "pipeline.n_keep",        "pipeline.forward_beam",
      "pipeline.backward_beam", "pipeline.lm_language", "train.epochs",
      "train.learning_rate",  "train.batch_size",       "train.l2",
      "train.seed",           "features.min_n",         "features.max_n",
      "features.min_count",   "output.dir",             "cache.dir",
      "run.workers",          "run.offline",            "run.union"};
  static const std::set<std::string> kBackendFields = {
      "kind",     "pivot_language", "lm_language", "endpoint",
      "model_id", "token_env",      "translator",  "concurrency",
      "seed",     "collision_rate"};
  static const std::set<std::string> kKinds = {"pivot", "lm", "mock"};

  std::map<std::string, BackendDescriptor> backends;
  std::vector<std::string> backend_order;
  for (const auto& [key, value] : values) {
    if (key.rfind("backend.", 0) == 0) {
      const auto dot = key.rfind('.');
      const std::string id = key.substr(8, dot - 8);
      const std::string field = key.substr(dot + 1);
      if (dot <= 8 || id.empty() || !kBackendFields.count(field)) {
        fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
      }
      if (backends.emplace(id, BackendDescriptor{}).second) backend_order.push_back(id);
    } else if (!kTopLevel.count(key)) {
      fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
    }
  }

  ExperimentConfig cfg;
  auto path_of = [&](const std::string& key, const fs::path& fallback) -> fs::path {
    fs::path p = get_as<std::string>(values, key, fallback.string());
    if (!p.empty() && p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p;
  };

  cfg.corpus_path = path_of("corpus.path", {});
  if (cfg.corpus_path.empty()) fail(ErrorKind::kConfig, "corpus.path is required");
  cfg.corpus_format = get_as<std::string>(values, "corpus.format", cfg.corpus_format);
  if (cfg.corpus_format != "clinc" && cfg.corpus_format != "generic") {
    fail(ErrorKind::kConfig, "corpus.format must be 'clinc' or 'generic'");
  }
  cfg.corpus_name = get_as<std::string>(values, "corpus.name",
                                        cfg.corpus_format == "clinc" ? "SCOPE" : "");
  cfg.test_path = path_of("corpus.test_path", {});
  if (cfg.corpus_format == "generic" && cfg.test_path.empty()) {
    fail(ErrorKind::kConfig, "corpus.test_path is required for generic corpora");
  }
  cfg.corpus_language = get_as<std::string>(values, "corpus.language", cfg.corpus_language);

  cfg.k_values = get_as<std::vector<std::size_t>>(values, "partition.k", {});
  for (auto k : cfg.k_values) {
    if (k < 1) fail(ErrorKind::kConfig, "partition.k values must be >= 1");
  }
  cfg.partition_seed = get_as<std::uint64_t>(values, "partition.seed", 0);

  cfg.pipeline.n_keep = get_as<int>(values, "pipeline.n_keep", cfg.pipeline.n_keep);
  cfg.pipeline.forward_beam =
      get_as<int>(values, "pipeline.forward_beam", cfg.pipeline.forward_beam);
  cfg.pipeline.backward_beam =
      get_as<int>(values, "pipeline.backward_beam", cfg.pipeline.n_keep + 1);
  cfg.pipeline.lm_language =
      get_as<std::string>(values, "pipeline.lm_language", cfg.pipeline.lm_language);

  cfg.train.epochs = get_as<int>(values, "train.epochs", cfg.train.epochs);
  cfg.train.learning_rate =
      get_as<double>(values, "train.learning_rate", cfg.train.learning_rate);
  cfg.train.batch_size = get_as<std::size_t>(values, "train.batch_size", cfg.train.batch_size);
  cfg.train.l2 = get_as<double>(values, "train.l2", cfg.train.l2);
  cfg.train.seed = get_as<std::uint64_t>(values, "train.seed", cfg.train.seed);
  cfg.features.min_n = get_as<int>(values, "features.min_n", cfg.features.min_n);
  cfg.features.max_n = get_as<int>(values, "features.max_n", cfg.features.max_n);
  cfg.features.min_count =
      get_as<std::size_t>(values, "features.min_count", cfg.features.min_count);

  cfg.output_dir = path_of("output.dir", cfg.output_dir);
  cfg.cache_dir = path_of("cache.dir", cfg.cache_dir);
  cfg.workers = std::max<std::size_t>(1, get_as<std::size_t>(values, "run.workers", 1));
  cfg.offline = get_as<bool>(values, "run.offline", false);
  cfg.union_backends = get_as<bool>(values, "run.union", false);

  for (const auto& id : backend_order) {
    const std::string prefix = "backend." + id + ".";
    BackendDescriptor d;
    d.id = id;
    d.kind = get_as<std::string>(values, prefix + "kind", "");
    if (!kKinds.count(d.kind)) {
      fail(ErrorKind::kConfig, "backend '" + id + "' has unknown kind '" + d.kind +
                                   "' (expected pivot, lm or mock)");
    }
    d.pivot_language = get_as<std::string>(values, prefix + "pivot_language", "");
    d.lm_language = get_as<std::string>(values, prefix + "lm_language", cfg.pipeline.lm_language);
    d.endpoint = get_as<std::string>(values, prefix + "endpoint", "mock");
    if (d.kind == "mock") {
      d.kind = "lm";
      d.endpoint = "mock";
    }
    d.model_id = get_as<std::string>(values, prefix + "model_id",
                                     d.is_mock() ? "mock-v1" : "");
    d.token_env = get_as<std::string>(values, prefix + "token_env", "");
    d.translator = get_as<std::string>(values, prefix + "translator", "");
    d.concurrency = get_as<std::size_t>(values, prefix + "concurrency", 1);
    d.seed = get_as<std::uint64_t>(values, prefix + "seed", 0);
    d.collision_rate = get_as<double>(values, prefix + "collision_rate", 0.0);
    if (d.method() == Method::kPivot && d.pivot_language.empty()) {
      fail(ErrorKind::kConfig, "pivot backend '" + id + "' needs pivot_language");
    }
    if (!d.is_mock() && d.endpoint.rfind("http", 0) != 0) {
      fail(ErrorKind::kConfig, "backend '" + id + "' endpoint must be 'mock' or an http(s) URL");
    }
    if (!(d.collision_rate >= 0.0 && d.collision_rate < 1.0)) {
      fail(ErrorKind::kConfig, "backend '" + id + "' collision_rate must be in [0, 1)");
    }
    cfg.backends.push_back(std::move(d));
  }
  for (const auto& d : cfg.backends) {
    if (!d.translator.empty() && !backends.count(d.translator)) {
      fail(ErrorKind::kConfig, "backend '" + d.id + "' names unknown translator '" +
                                   d.translator + "'");
    }
    PipelineConfig p = cfg.pipeline;
    p.pivot_language = d.pivot_language;
    p.lm_language = d.lm_language;
    p.validate(d.method());
  }

  std::error_code ec;
  if (fs::weakly_canonical(cfg.output_dir, ec) == fs::weakly_canonical(cfg.cache_dir, ec)) {
    fail(ErrorKind::kConfig, "output.dir and cache.dir must differ");
  }

  ConfigValues& r = cfg.resolved;
  r["corpus.path"] = cfg.corpus_path.string();
  r["corpus.format"] = cfg.corpus_format;
  r["corpus.name"] = cfg.corpus_name;
  r["corpus.test_path"] = cfg.test_path.string();
  r["corpus.language"] = cfg.corpus_language;
  r["partition.k"] = cfg.k_values;
  r["partition.seed"] = cfg.partition_seed;
  r["pipeline.n_keep"] = cfg.pipeline.n_keep;
  r["pipeline.forward_beam"] = cfg.pipeline.forward_beam;
  r["pipeline.backward_beam"] = cfg.pipeline.backward_beam;
  r["pipeline.lm_language"] = cfg.pipeline.lm_language;
  r["train.epochs"] = cfg.train.epochs;
  r["train.learning_rate"] = cfg.train.learning_rate;
  r["train.batch_size"] = cfg.train.batch_size;
  r["train.l2"] = cfg.train.l2;
  r["train.seed"] = cfg.train.seed;
  r["features.min_n"] = cfg.features.min_n;
  r["features.max_n"] = cfg.features.max_n;
  r["features.min_count"] = cfg.features.min_count;
  r["output.dir"] = cfg.output_dir.string();
  r["cache.dir"] = cfg.cache_dir.string();
  r["run.workers"] = cfg.workers;
  r["run.offline"] = cfg.offline;
  r["run.union"] = cfg.union_backends;
  for (const auto& d : cfg.backends) {
    const std::string prefix = "backend." + d.id + ".";
    r[prefix + "kind"] = d.kind;
    r[prefix + "pivot_language"] = d.pivot_language;
    r[prefix + "lm_language"] = d.lm_language;
    r[prefix + "endpoint"] = d.endpoint;
    r[prefix + "model_id"] = d.model_id;
    r[prefix + "token_env"] = d.token_env;
    r[prefix + "translator"] = d.translator;
    r[prefix + "concurrency"] = d.concurrency;
    r[prefix + "seed"] = d.seed;
    r[prefix + "collision_rate"] = d.collision_rate;
  }
  return cfg;
}

std::string config_hash(const ConfigValues& resolved) {
  json canonical = json::object();
  for (const auto& [key, value] : resolved) canonical[key] = value;
  return sha256_hex(canonical.dump());
}

}  // namespace paraforge
