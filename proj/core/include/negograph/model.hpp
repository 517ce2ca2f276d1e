#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "negograph/autodiff.hpp"
#include "negograph/config.hpp"
#include "negograph/corpus.hpp"
#include "negograph/dialenc.hpp"
#include "negograph/gnn.hpp"
#include "negograph/layers.hpp"
#include "negograph/price.hpp"
#include "negograph/vocab.hpp"

namespace negograph {

struct EncodedTurn {
  Speaker speaker = Speaker::buyer;
  std::vector<std::size_t> tokens;
  std::vector<LabelId> strategies;
  LabelId act = 0;
};

/// A dialogue mapped onto vocabulary ids, ready for the model.
struct EncodedDialogue {
  std::string id;
  double listed_price = 0.0;
  std::vector<EncodedTurn> turns;
  /// Outcome class in 1..5 when a sale happened and boundaries are known.
  std::optional<int> outcome_class;
};

EncodedDialogue encode_dialogue(const Dialogue& d, const TokenVocab& tokens,
                                const RatioBoundaries* boundaries);
std::vector<EncodedDialogue> encode_corpus(const Corpus& corpus, const TokenVocab& tokens,
                                           const RatioBoundaries* boundaries);

// ---- heads ------------------------------------------------------------------

struct StrategyPrediction {
  std::vector<double> probabilities;
  std::vector<bool> khot;
};

/// sigmoid per logit; k-hot uses a strict > 0.5 threshold.
StrategyPrediction predict_strategies(std::span<const double> logits);
/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);
/// First index of the maximum.
std::size_t argmax(std::span<const double> values);

/// Joint next-turn model: hierarchical dialogue encoder, strategy and dialogue
/// act structure encoders, prediction heads and a GRU utterance decoder.
class NegotiationModel {
 public:
  NegotiationModel(const Config& config, TokenVocab tokens, LabelVocab strategies,
                   LabelVocab dialogue_acts,
                   std::shared_ptr<const EmbeddingTable> external = nullptr);
  NegotiationModel(const NegotiationModel&) = delete;
  NegotiationModel& operator=(const NegotiationModel&) = delete;

  struct Step {
    nd::Var h;  // [h^u ; h^ST ; h^da] (h^u alone for the none variant)
    nd::Var strategy_logits;
    nd::Var act_logits;
    nd::Var outcome_logits;
  };
  struct Pass {
    std::vector<Step> steps;
    std::vector<AttentionTrace> strategy_traces;
    std::vector<AttentionTrace> act_traces;
  };

  /// Encodes the prefixes ending at turns 0 .. count-1. Step t sees turns
  /// 0..t only and predicts turn t+1.
  Pass forward(nd::Tape& tape, const EncodedDialogue& d, std::size_t count, bool training,
               nd::Xoshiro256* dropout_rng = nullptr, bool keep_traces = false) const;

  /// Teacher-forced NLL of `target` (without markers; </s> is appended and
  /// the target is cut to max_target_len first).
  nd::Var decoder_loss(nd::Tape& tape, nd::Var h, std::span<const std::size_t> target) const;
  /// Greedy decoding; never emits <s>. Stops after emitting </s> (which is
  /// returned as the last id) or after max_len ids.
  std::vector<std::size_t> greedy_decode(const nd::Tensor& h, std::size_t max_len) const;
  /// Joins tokens, replacing grid placeholders by "$x.xx" of `listed`.
  std::string realize(std::span<const std::size_t> ids, double listed) const;

  nd::ParameterStore& parameters() { return store_; }
  const nd::ParameterStore& parameters() const { return store_; }
  const Config& config() const { return config_; }
  const TokenVocab& tokens() const { return tokens_; }
  const LabelVocab& strategies() const { return strategies_; }
  const LabelVocab& dialogue_acts() const { return acts_; }
  std::size_t joint_dim() const { return joint_dim_; }
  /// Strategy labels the head predicts: every label but the trailing <start>.
  std::size_t target_strategy_count() const { return target_strategies_; }

  std::optional<RatioBoundaries> boundaries;

 private:
  Config config_;
  TokenVocab tokens_;
  LabelVocab strategies_;
  LabelVocab acts_;
  std::shared_ptr<const EmbeddingTable> external_;
  nd::ParameterStore store_;

  nd::Parameter* word_embed_ = nullptr;
  UtteranceEncoder utterance_;
  ContextEncoder context_;
  StructureEncoder st_graph_;
  StructureEncoder da_graph_;
  nd::GruCell st_rnn_;
  nd::GruCell da_rnn_;
  nd::Linear st_head_;
  nd::Linear da_head_;
  nd::Linear outcome_head_;
  nd::Linear bridge_;
  nd::GruCell decoder_;
  nd::Linear out_proj_;
  std::size_t joint_dim_ = 0;
  std::size_t target_strategies_ = 0;
};

}  // namespace negograph
