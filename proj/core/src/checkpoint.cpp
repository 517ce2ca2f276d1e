#include "negograph/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace negograph {

namespace {

constexpr char kMagic[8] = {'N', 'G', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_doubles(std::ostream& out, const nd::Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.values().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

class Reader {
 public:
  Reader(std::istream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  template <typename T>
  T get() {
    T v{};
    read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
  }
  std::string string(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void doubles(nd::Tensor& t) { read(reinterpret_cast<char*>(t.values().data()), t.size() * sizeof(double)); }

 private:
  void read(char* dst, std::size_t n) {
    if (!in_.read(dst, static_cast<std::streamsize>(n))) {
      throw CheckpointError("checkpoint " + path_.string() + " is truncated");
    }
  }
  std::istream& in_;
  const std::filesystem::path& path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const NegotiationModel& model,
                     const ClassWeights& weights, const nd::Adam* optimizer) {
  nlohmann::json header = {{"config", model.config().to_json()},
                           {"tokens", model.tokens().tokens()},
                           {"strategies", model.strategies().labels()},
                           {"dialogue_acts", model.dialogue_acts().labels()},
                           {"delta", weights.delta},
                           {"rho", weights.rho}};
  if (model.boundaries) {
    header["ratio_boundaries"] = model.boundaries->cuts;
    header["ratio_boundaries_degenerate"] = model.boundaries->degenerate;
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(kMagic, 8);
  put<std::uint64_t>(out, model.config().hash());
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  const auto& store = model.parameters();
  put<std::uint64_t>(out, store.size());
  for (const auto& p : store) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint64_t>(out, p.value.rows());
    put<std::uint64_t>(out, p.value.cols());
    put_doubles(out, p.value);
  }
  put<std::uint8_t>(out, optimizer != nullptr ? 1 : 0);
  if (optimizer != nullptr) {
    put<std::uint64_t>(out, optimizer->step_count());
    for (const auto& m : optimizer->first_moments()) put_doubles(out, m);
    for (const auto& v : optimizer->second_moments()) put_doubles(out, v);
  }
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

LoadedModel load_checkpoint(const std::filesystem::path& path,
                            std::optional<std::uint64_t> expected_hash,
                            std::shared_ptr<const EmbeddingTable> external) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  Reader r(in, path);
  if (r.string(8) != std::string(kMagic, 8)) throw CheckpointError(path.string() + " is not a checkpoint");
  const auto stored_hash = r.get<std::uint64_t>();
  const auto header_len = r.get<std::uint64_t>();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.string(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("checkpoint header: " + std::string(e.what()));
  }
  const Config config = Config::from_json(header.at("config"));
  if (config.hash() != stored_hash) {
    throw CheckpointError("checkpoint " + path.string() + ": config hash mismatch (stored " +
                          to_hex(stored_hash) + ", header " + config.hash_hex() + ")");
  }
  if (expected_hash && *expected_hash != stored_hash) {
    throw CheckpointError("checkpoint " + path.string() + " was trained with config " +
                          to_hex(stored_hash) + ", expected " + to_hex(*expected_hash));
  }

  TokenVocab tokens = TokenVocab::from_tokens(header.at("tokens").get<std::vector<std::string>>());
  LabelVocab strategies("strategy", header.at("strategies").get<std::vector<std::string>>());
  LabelVocab acts("dialogue act", header.at("dialogue_acts").get<std::vector<std::string>>());

  if (config.utterance_encoder == "external" && !external) {
    external = std::make_shared<const EmbeddingTable>(EmbeddingTable::load(config.external_embeddings));
  }
  LoadedModel out;
  out.config_hash = stored_hash;
  out.model = std::make_unique<NegotiationModel>(config, std::move(tokens), std::move(strategies),
                                                 std::move(acts), external);
  if (header.contains("ratio_boundaries")) {
    RatioBoundaries b;
    b.cuts = header["ratio_boundaries"].get<std::array<double, 4>>();
    b.degenerate = header.value("ratio_boundaries_degenerate", false);
    out.model->boundaries = b;
  }
  out.weights.delta = header.at("delta").get<std::vector<double>>();
  out.weights.rho = header.at("rho").get<std::vector<double>>();

  auto& store = out.model->parameters();
  const auto count = r.get<std::uint64_t>();
  if (count != store.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(count) + " parameters, model has " +
                          std::to_string(store.size()));
  }
  for (auto& p : store) {
    const auto name = r.string(r.get<std::uint32_t>());
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      throw CheckpointError("checkpoint parameter '" + name + "' (" + std::to_string(rows) + "x" +
                            std::to_string(cols) + ") does not match model parameter '" + p.name +
                            "' (" + p.value.shape_string() + ")");
    }
    r.doubles(p.value);
  }
  if (r.get<std::uint8_t>() != 0) {
    const auto& cfg = out.model->config();
    nd::Adam adam(store, {cfg.lr, 0.9, 0.999, 1e-8, cfg.l2});
    adam.set_step_count(r.get<std::uint64_t>());
    for (auto& m : adam.first_moments()) r.doubles(m);
    for (auto& v : adam.second_moments()) r.doubles(v);
    out.optimizer = std::move(adam);
  }
  return out;
}

}  // namespace negograph
