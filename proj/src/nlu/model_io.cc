#include <bit>
#include <cstring>

#include "json.hpp"
#include "paraforge/error.h"
#include "paraforge/io.h"
#include "paraforge/nlu.h"

namespace paraforge {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "PFCLSMDL";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::kParse, "model file is truncated");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t u64() { return little(take(8)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little(take(4))); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  static std::uint64_t little(std::string_view raw) {
    std::uint64_t v = 0;
    for (std::size_t i = raw.size(); i-- > 0;) {
      v = (v << 8) | static_cast<unsigned char>(raw[i]);
    }
    return v;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const ClassifierModel& model) {
  const auto& vocab = model.vocabulary();
  const auto& cfg = model.config();
  json header = {
      {"labels", model.labels()},
      {"vocabulary",
       {{"min_n", vocab.config().min_n},
        {"max_n", vocab.config().max_n},
        {"min_count", vocab.config().min_count},
        {"keys", vocab.keys()},
        {"counts", vocab.counts()}}},
      {"train",
       {{"epochs", cfg.epochs},
        {"learning_rate", cfg.learning_rate},
        {"batch_size", cfg.batch_size},
        {"l2", cfg.l2},
        {"seed", cfg.seed}}},
      {"loss_history", model.loss_history()},
  };
  const std::string text = header.dump();

  std::string out(kMagic);
  put_u32(out, kModelFormatVersion);
  put_u64(out, text.size());
  out += text;
  for (double w : model.weights()) put_u64(out, std::bit_cast<std::uint64_t>(w));
  for (double b : model.bias()) put_u64(out, std::bit_cast<std::uint64_t>(b));
  return out;
}

ClassifierModel deserialize_model(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) fail(ErrorKind::kParse, "not a model file");
  const std::uint32_t version = in.u32();
  if (version != kModelFormatVersion) {
    fail(ErrorKind::kParse, "model format version " + std::to_string(version) +
                                " is not supported (expected " +
                                std::to_string(kModelFormatVersion) + ")");
  }
  json header;
  try {
    header = json::parse(in.take(in.u64()));
    const auto& v = header.at("vocabulary");
    VocabConfig vocab_cfg{v.at("min_n").get<int>(), v.at("max_n").get<int>(),
                          v.at("min_count").get<std::size_t>()};
    FeatureVocabulary vocab(vocab_cfg, v.at("keys").get<std::vector<std::string>>(),
                            v.at("counts").get<std::vector<std::uint64_t>>());
    auto labels = header.at("labels").get<std::vector<std::string>>();
    const auto& t = header.at("train");
    TrainConfig cfg{t.at("epochs").get<int>(), t.at("learning_rate").get<double>(),
                    t.at("batch_size").get<std::size_t>(), t.at("l2").get<double>(),
                    t.at("seed").get<std::uint64_t>()};

    std::vector<double> weights(vocab.dimension() * labels.size());
    for (double& w : weights) w = in.f64();
    std::vector<double> bias(labels.size());
    for (double& b : bias) b = in.f64();
    if (!in.done()) fail(ErrorKind::kParse, "trailing bytes after model weights");

    ClassifierModel model(std::move(vocab), std::move(labels), std::move(weights),
                          std::move(bias), cfg);
    model.set_loss_history(header.at("loss_history").get<std::vector<double>>());
    return model;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("bad model header: ") + e.what());
  }
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

ClassifierModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

}  // namespace paraforge
