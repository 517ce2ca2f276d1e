#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "negograph/autodiff.hpp"
#include "negograph/layers.hpp"

namespace negograph {

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Precomputed per-utterance vectors keyed by (dialogue id, turn index).
///
/// File layout (little endian): "NGEMB001", u32 dim, u64 count, then per
/// entry u32 id length, id bytes, u32 turn, dim x f32.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  void put(const std::string& dialogue_id, std::size_t turn, std::vector<float> values);
  const std::vector<float>& get(const std::string& dialogue_id, std::size_t turn) const;
  bool contains(const std::string& dialogue_id, std::size_t turn) const;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

  static EmbeddingTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t dim_ = 0;
  std::map<std::pair<std::string, std::size_t>, std::vector<float>> entries_;
};

enum class UtteranceMode { trainable, external };

/// e_t for one utterance. Trainable mode: linear(mean of word embeddings).
/// External mode: table lookup, constant on the tape.
class UtteranceEncoder {
 public:
  UtteranceEncoder() = default;
  /// `word_embeddings` is shared with the decoder.
  UtteranceEncoder(nd::ParameterStore& store, const std::string& name,
                   nd::Parameter& word_embeddings, std::size_t output_dim, nd::Xoshiro256& rng);
  explicit UtteranceEncoder(const EmbeddingTable* table);

  UtteranceMode mode() const { return mode_; }
  std::size_t output_dim() const { return output_dim_; }

  /// Empty token lists read as a lone end marker (id `empty_token`).
  nd::Var encode(nd::Tape& tape, std::span<const std::size_t> token_ids,
                 const std::string& dialogue_id, std::size_t turn,
                 std::size_t empty_token = 2) const;

 private:
  UtteranceMode mode_ = UtteranceMode::trainable;
  nd::Parameter* embed_ = nullptr;
  nd::Linear proj_;
  const EmbeddingTable* table_ = nullptr;
  std::size_t output_dim_ = 0;
};

/// GRU over utterance embeddings; h^U_t is the state after e_1..e_t.
class ContextEncoder {
 public:
  ContextEncoder() = default;
  ContextEncoder(nd::ParameterStore& store, const std::string& name, std::size_t input_dim,
                 std::size_t hidden_dim, nd::Xoshiro256& rng);

  std::size_t hidden_dim() const { return gru_.hidden_dim(); }
  const nd::GruCell& cell() const { return gru_; }

  /// States after each prefix; throws std::invalid_argument on empty input.
  std::vector<nd::Var> encode(nd::Tape& tape, std::span<const nd::Var> embeddings) const;

  /// Off-tape incremental update for live sessions.
  nd::Tensor step(const nd::Tensor& h, const nd::Tensor& e) const;
  nd::Tensor initial_state() const { return nd::Tensor(1, hidden_dim()); }

 private:
  nd::GruCell gru_;
};

}  // namespace negograph
