#include "negograph/config.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace negograph {

using nlohmann::json;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::graph: return "graph";
    case Variant::rnn: return "rnn";
    case Variant::none: return "none";
  }
  return "graph";
}

Variant parse_variant(std::string_view s) {
  if (s == "graph") return Variant::graph;
  if (s == "rnn") return Variant::rnn;
  if (s == "none") return Variant::none;
  throw std::invalid_argument("unknown encoder variant '" + std::string(s) +
                              "' (expected graph, rnn or none)");
}

namespace {

// One table drives both directions so the two cannot drift apart.
template <typename F>
void visit_fields(Config& c, F&& f) {
  f("utterance_encoder", c.utterance_encoder);
  f("external_embeddings", c.external_embeddings);
  f("word_embedding_dim", c.word_embedding_dim);
  f("dialogue_context_embedding", c.dialogue_context_embedding);
  f("dialogue_context_dropout", c.dialogue_context_dropout);
  f("context_hidden", c.context_hidden);
  f("hidden_dim", c.hidden_dim);
  f("graph_layers", c.graph_layers);
  f("asap_pooling_ratio", c.asap_pooling_ratio);
  f("graph_dropout", c.graph_dropout);
  f("projection_strategy", c.projection_strategy);
  f("projection_da", c.projection_da);
  f("rnn_hidden_size", c.rnn_hidden_size);
  f("turn_recency", c.turn_recency);
  f("decoder_hidden", c.decoder_hidden);
  f("max_target_len", c.max_target_len);
  f("max_decode_len", c.max_decode_len);
  f("min_turns", c.min_turns);
  f("token_min_count", c.token_min_count);
  f("lr", c.lr);
  f("l2", c.l2);
  f("max_utterances_in_batch", c.max_utterances_in_batch);
  f("weighted_strategy_loss", c.weighted_strategy_loss);
  f("weighted_da_loss", c.weighted_da_loss);
  f("loss_alpha", c.loss_alpha);
  f("loss_beta", c.loss_beta);
  f("loss_gamma", c.loss_gamma);
  f("max_epochs", c.max_epochs);
  f("patience", c.patience);
  f("seed", c.seed);
}

}  // namespace

Config Config::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  Config c;
  std::size_t seen = 0;
  if (auto it = j.find("variant"); it != j.end()) {
    c.variant = parse_variant(it->get<std::string>());
    ++seen;
  }
  visit_fields(c, [&](const char* key, auto& field) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
      it->get_to(field);
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
    }
    ++seen;
  });
  if (seen != j.size()) {
    Config probe;
    for (const auto& [key, value] : j.items()) {
      if (!probe.to_json().contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json Config::to_json() const {
  json j;
  j["variant"] = std::string(negograph::to_string(variant));
  Config copy = *this;
  visit_fields(copy, [&](const char* key, auto& field) { j[key] = field; });
  return j;
}

void Config::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what);
  };
  require(utterance_encoder == "trainable" || utterance_encoder == "external",
          "utterance_encoder must be trainable or external");
  require(utterance_encoder != "external" || !external_embeddings.empty(),
          "external utterance encoder needs external_embeddings");
  require(word_embedding_dim > 0 && dialogue_context_embedding > 0 && context_hidden > 0,
          "encoder dimensions must be positive");
  require(hidden_dim > 0 && graph_layers > 0, "graph dimensions must be positive");
  require(asap_pooling_ratio > 0.0 && asap_pooling_ratio <= 1.0, "asap_pooling_ratio must be in (0, 1]");
  require(dialogue_context_dropout >= 0.0 && dialogue_context_dropout < 1.0,
          "dialogue_context_dropout must be in [0, 1)");
  require(graph_dropout >= 0.0 && graph_dropout < 1.0, "graph_dropout must be in [0, 1)");
  require(projection_strategy > 0 && projection_da > 0 && rnn_hidden_size > 0,
          "projection sizes must be positive");
  require(decoder_hidden > 0 && max_target_len > 0 && max_decode_len > 0,
          "decoder sizes must be positive");
  require(lr > 0.0 && l2 >= 0.0, "lr must be positive and l2 nonnegative");
  require(max_utterances_in_batch > 0, "max_utterances_in_batch must be positive");
  require(loss_alpha >= 0.0 && loss_beta >= 0.0 && loss_gamma >= 0.0, "loss weights must be nonnegative");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t Config::hash() const { return fnv1a64(to_json().dump()); }
std::string Config::hash_hex() const { return to_hex(hash()); }

}  // namespace negograph
