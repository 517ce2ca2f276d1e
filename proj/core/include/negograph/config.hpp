#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace negograph {

enum class Variant { graph, rnn, none };

std::string_view to_string(Variant v);
/// Throws std::invalid_argument for names other than graph / rnn / none.
Variant parse_variant(std::string_view s);

/// Model and training settings. JSON keys follow the hyperparameter names used
/// for the published runs ("lr", "asap_pooling_ratio", "loss_beta", ...).
struct Config {
  // encoders
  Variant variant = Variant::graph;
  std::string utterance_encoder = "trainable";  // or "external"
  std::string external_embeddings;              // path, external mode only
  std::size_t word_embedding_dim = 300;
  std::size_t dialogue_context_embedding = 300;
  double dialogue_context_dropout = 0.1;
  std::size_t context_hidden = 300;
  std::size_t hidden_dim = 64;
  std::size_t graph_layers = 2;
  double asap_pooling_ratio = 0.8;
  double graph_dropout = 0.0;
  std::size_t projection_strategy = 64;
  std::size_t projection_da = 64;
  std::size_t rnn_hidden_size = 64;
  bool turn_recency = false;
  // decoder
  std::size_t decoder_hidden = 300;
  std::size_t max_target_len = 30;
  std::size_t max_decode_len = 30;
  // data
  std::size_t min_turns = 5;
  std::size_t token_min_count = 1;
  // optimization
  double lr = 1e-3;
  double l2 = 1e-3;
  std::size_t max_utterances_in_batch = 128;
  bool weighted_strategy_loss = true;
  bool weighted_da_loss = true;
  double loss_alpha = 1.0;
  double loss_beta = 10.0;
  double loss_gamma = 10.0;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::uint64_t seed = 1;

  /// Unknown keys are rejected so typos do not silently fall back to defaults.
  static Config from_json(const nlohmann::json& j);
  static Config load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;

  /// FNV-1a 64 over the canonical JSON dump (sorted keys).
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string to_hex(std::uint64_t v);

}  // namespace negograph
