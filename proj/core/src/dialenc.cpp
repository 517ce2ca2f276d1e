#include "negograph/dialenc.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace negograph {

namespace {

constexpr char kMagic[8] = {'N', 'G', 'E', 'M', 'B', '0', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error("embedding file " + path.string() + " is truncated");
  }
  return v;
}

}  // namespace

void EmbeddingTable::put(const std::string& dialogue_id, std::size_t turn,
                         std::vector<float> values) {
  if (values.size() != dim_) {
    throw nd::ShapeError("embedding table: vector of size " + std::to_string(values.size()) +
                         " for dim " + std::to_string(dim_));
  }
  entries_[{dialogue_id, turn}] = std::move(values);
}

const std::vector<float>& EmbeddingTable::get(const std::string& dialogue_id,
                                              std::size_t turn) const {
  auto it = entries_.find({dialogue_id, turn});
  if (it == entries_.end()) {
    throw LookupError("no external embedding for dialogue '" + dialogue_id + "' turn " +
                      std::to_string(turn));
  }
  return it->second;
}

bool EmbeddingTable::contains(const std::string& dialogue_id, std::size_t turn) const {
  return entries_.count({dialogue_id, turn}) != 0;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error(path.string() + " is not an embedding file");
  }
  EmbeddingTable t(read_pod<std::uint32_t>(in, path));
  const auto count = read_pod<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = read_pod<std::uint32_t>(in, path);
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw std::runtime_error("embedding file " + path.string() + " is truncated");
    const auto turn = read_pod<std::uint32_t>(in, path);
    std::vector<float> v(t.dim_);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)))) {
      throw std::runtime_error("embedding file " + path.string() + " is truncated");
    }
    t.entries_[{std::move(id), turn}] = std::move(v);
  }
  return t;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embedding file " + path.string());
  out.write(kMagic, 8);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  write_pod<std::uint64_t>(out, entries_.size());
  for (const auto& [key, v] : entries_) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(key.first.size()));
    out.write(key.first.data(), static_cast<std::streamsize>(key.first.size()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(key.second));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
  }
}

// ---- utterance encoder ------------------------------------------------------

UtteranceEncoder::UtteranceEncoder(nd::ParameterStore& store, const std::string& name,
                                   nd::Parameter& word_embeddings, std::size_t output_dim,
                                   nd::Xoshiro256& rng)
    : mode_(UtteranceMode::trainable),
      embed_(&word_embeddings),
      proj_(store, name + ".proj", word_embeddings.value.cols(), output_dim, rng),
      output_dim_(output_dim) {}

UtteranceEncoder::UtteranceEncoder(const EmbeddingTable* table)
    : mode_(UtteranceMode::external), table_(table), output_dim_(table->dim()) {}

nd::Var UtteranceEncoder::encode(nd::Tape& tape, std::span<const std::size_t> token_ids,
                                 const std::string& dialogue_id, std::size_t turn,
                                 std::size_t empty_token) const {
  if (mode_ == UtteranceMode::external) {
    const auto& v = table_->get(dialogue_id, turn);
    return tape.constant(nd::Tensor(1, v.size(), std::vector<double>(v.begin(), v.end())));
  }
  const nd::Var table = tape.param(*embed_);
  const nd::Var words = token_ids.empty()
                            ? nd::gather_rows(table, std::span<const std::size_t>(&empty_token, 1))
                            : nd::gather_rows(table, token_ids);
  return proj_(tape, nd::mean_rows(words));
}

// ---- context encoder --------------------------------------------------------

ContextEncoder::ContextEncoder(nd::ParameterStore& store, const std::string& name,
                               std::size_t input_dim, std::size_t hidden_dim, nd::Xoshiro256& rng)
    : gru_(store, name, input_dim, hidden_dim, rng) {}

std::vector<nd::Var> ContextEncoder::encode(nd::Tape& tape,
                                            std::span<const nd::Var> embeddings) const {
  if (embeddings.empty()) throw std::invalid_argument("context encoder: empty utterance sequence");
  const auto p = gru_.bind(tape);
  nd::Var h = tape.constant(initial_state());
  std::vector<nd::Var> states;
  states.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    h = gru_.step(p, e, h);
    states.push_back(h);
  }
  return states;
}

nd::Tensor ContextEncoder::step(const nd::Tensor& h, const nd::Tensor& e) const {
  nd::Tape tape;
  const auto p = gru_.bind(tape);
  return gru_.step(p, tape.constant(e), tape.constant(h)).value();
}

}  // namespace negograph
