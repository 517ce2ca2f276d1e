#include "negograph/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace negograph {

using nd::Tensor;
using nd::Var;

EncodedDialogue encode_dialogue(const Dialogue& d, const TokenVocab& tokens,
                                const RatioBoundaries* boundaries) {
  EncodedDialogue out;
  out.id = d.id;
  out.listed_price = d.scenario.listed_price;
  out.turns.reserve(d.turns.size());
  for (const auto& t : d.turns) {
    EncodedTurn et;
    et.speaker = t.speaker;
    et.tokens.reserve(t.tokens.size());
    for (const auto& tok : t.tokens) et.tokens.push_back(tokens.id(tok));
    et.strategies = t.strategies;
    et.act = t.dialogue_act;
    out.turns.push_back(std::move(et));
  }
  if (boundaries != nullptr) {
    if (auto r = d.ratio()) out.outcome_class = ratio_to_class(*r, *boundaries);
  }
  return out;
}

std::vector<EncodedDialogue> encode_corpus(const Corpus& corpus, const TokenVocab& tokens,
                                           const RatioBoundaries* boundaries) {
  std::vector<EncodedDialogue> out;
  out.reserve(corpus.dialogues.size());
  for (const auto& d : corpus.dialogues) out.push_back(encode_dialogue(d, tokens, boundaries));
  return out;
}

StrategyPrediction predict_strategies(std::span<const double> logits) {
  StrategyPrediction p;
  p.probabilities.reserve(logits.size());
  p.khot.reserve(logits.size());
  for (double z : logits) {
    const double prob = 1.0 / (1.0 + std::exp(-z));
    p.probabilities.push_back(prob);
    p.khot.push_back(prob > 0.5);
  }
  return p;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

// ---- model ------------------------------------------------------------------

NegotiationModel::NegotiationModel(const Config& config, TokenVocab tokens,
                                   LabelVocab strategies, LabelVocab dialogue_acts,
                                   std::shared_ptr<const EmbeddingTable> external)
    : config_(config),
      tokens_(std::move(tokens)),
      strategies_(std::move(strategies)),
      acts_(std::move(dialogue_acts)),
      external_(std::move(external)) {
  config_.validate();
  target_strategies_ = strategies_.size();
  if (strategies_.contains("<start>")) {
    if (strategies_.id("<start>") != strategies_.size() - 1) {
      throw VocabularyError("strategy vocabulary: <start> must be the last label");
    }
    --target_strategies_;
  }

  auto rng = nd::make_stream(config_.seed, nd::Stream::init);
  const std::size_t wd = config_.word_embedding_dim;
  word_embed_ = &store_.add_normal("word_embed", tokens_.size(), wd, 1.0 / std::sqrt(double(wd)), rng);

  std::size_t e_dim = config_.dialogue_context_embedding;
  if (config_.utterance_encoder == "external") {
    if (!external_) throw std::invalid_argument("external utterance encoder without an embedding table");
    utterance_ = UtteranceEncoder(external_.get());
    e_dim = external_->dim();
  } else {
    utterance_ = UtteranceEncoder(store_, "utterance", *word_embed_, e_dim, rng);
  }
  context_ = ContextEncoder(store_, "context", e_dim, config_.context_hidden, rng);

  std::size_t st_dim = config_.context_hidden;
  std::size_t da_dim = config_.context_hidden;
  if (config_.variant == Variant::graph) {
    GnnConfig g;
    g.hidden_dim = config_.hidden_dim;
    g.layers = config_.graph_layers;
    g.pool_ratio = config_.asap_pooling_ratio;
    g.dropout = config_.graph_dropout;
    g.turn_recency = config_.turn_recency;
    g.fc_hidden = config_.projection_strategy;
    g.output_dim = config_.projection_strategy;
    st_graph_ = StructureEncoder(store_, "st_graph", strategies_.size(), g, rng);
    g.fc_hidden = config_.projection_da;
    g.output_dim = config_.projection_da;
    da_graph_ = StructureEncoder(store_, "da_graph", acts_.size(), g, rng);
    st_dim = config_.projection_strategy;
    da_dim = config_.projection_da;
  } else if (config_.variant == Variant::rnn) {
    st_rnn_ = nd::GruCell(store_, "st_rnn", strategies_.size(), config_.rnn_hidden_size, rng);
    da_rnn_ = nd::GruCell(store_, "da_rnn", acts_.size(), config_.rnn_hidden_size, rng);
    st_dim = da_dim = config_.rnn_hidden_size;
  }
  joint_dim_ = config_.variant == Variant::none ? config_.context_hidden
                                                : config_.context_hidden + st_dim + da_dim;

  st_head_ = nd::Linear(store_, "strategy_head", st_dim, target_strategies_, rng);
  da_head_ = nd::Linear(store_, "act_head", da_dim, acts_.size(), rng);
  outcome_head_ = nd::Linear(store_, "outcome_head", joint_dim_, 5, rng);
  bridge_ = nd::Linear(store_, "decoder.bridge", joint_dim_, config_.decoder_hidden, rng);
  decoder_ = nd::GruCell(store_, "decoder.gru", wd, config_.decoder_hidden, rng);
  out_proj_ = nd::Linear(store_, "decoder.out", config_.decoder_hidden, tokens_.size(), rng);
}

NegotiationModel::Pass NegotiationModel::forward(nd::Tape& tape, const EncodedDialogue& d,
                                                 std::size_t count, bool training,
                                                 nd::Xoshiro256* dropout_rng,
                                                 bool keep_traces) const {
  if (count == 0 || count > d.turns.size()) {
    throw std::invalid_argument("model: prefix count " + std::to_string(count) + " for a " +
                                std::to_string(d.turns.size()) + "-turn dialogue");
  }
  const bool drop = training && config_.dialogue_context_dropout > 0.0;
  if (drop && dropout_rng == nullptr) throw std::invalid_argument("model: dropout needs an rng");

  std::vector<Var> e;
  e.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    Var et = utterance_.encode(tape, d.turns[t].tokens, d.id, t, TokenVocab::kEos);
    if (drop) et = nd::dropout(et, config_.dialogue_context_dropout, true, *dropout_rng);
    e.push_back(et);
  }
  const std::vector<Var> hu = context_.encode(tape, e);

  Pass pass;
  pass.steps.reserve(count);
  StrategyGraph st_graph(strategies_.size());
  StrategyGraph da_graph(acts_.size());
  nd::GruCell::Bound st_p, da_p;
  Var st_h, da_h;
  if (config_.variant == Variant::rnn) {
    st_p = st_rnn_.bind(tape);
    da_p = da_rnn_.bind(tape);
    st_h = tape.constant(Tensor(1, config_.rnn_hidden_size));
    da_h = tape.constant(Tensor(1, config_.rnn_hidden_size));
  }
  const auto st_head = st_head_.bind(tape);
  const auto da_head = da_head_.bind(tape);
  const auto outcome_head = outcome_head_.bind(tape);

  for (std::size_t t = 0; t < count; ++t) {
    const auto& turn = d.turns[t];
    Var hs, hd;
    if (config_.variant == Variant::graph) {
      st_graph.extend(turn.strategies);
      da_graph.extend(std::span<const LabelId>(&turn.act, 1));
      if (st_graph.node_count() == 0) {
        hs = tape.constant(Tensor(1, st_graph_.output_dim()));
        if (keep_traces) pass.strategy_traces.emplace_back();
      } else {
        auto enc = st_graph_.encode(tape, st_graph, training, dropout_rng);
        hs = enc.h;
        if (keep_traces) pass.strategy_traces.push_back(std::move(enc.trace));
      }
      auto enc = da_graph_.encode(tape, da_graph, training, dropout_rng);
      hd = enc.h;
      if (keep_traces) pass.act_traces.push_back(std::move(enc.trace));
    } else if (config_.variant == Variant::rnn) {
      Tensor khot(1, strategies_.size());
      for (LabelId s : turn.strategies) khot(0, s) = 1.0;
      Tensor onehot(1, acts_.size());
      onehot(0, turn.act) = 1.0;
      st_h = st_rnn_.step(st_p, tape.constant(std::move(khot)), st_h);
      da_h = da_rnn_.step(da_p, tape.constant(std::move(onehot)), da_h);
      hs = st_h;
      hd = da_h;
    } else {
      hs = hd = hu[t];
    }

    Step step;
    if (config_.variant == Variant::none) {
      step.h = hu[t];
    } else {
      const Var parts[] = {hu[t], hs, hd};
      step.h = nd::concat_cols(parts);
    }
    step.strategy_logits = st_head_.apply(st_head, hs);
    step.act_logits = da_head_.apply(da_head, hd);
    step.outcome_logits = outcome_head_.apply(outcome_head, step.h);
    pass.steps.push_back(step);
  }
  return pass;
}

Var NegotiationModel::decoder_loss(nd::Tape& tape, Var h,
                                   std::span<const std::size_t> target) const {
  const std::size_t cut = std::min(target.size(), config_.max_target_len);
  std::vector<std::size_t> gold(target.begin(), target.begin() + static_cast<std::ptrdiff_t>(cut));
  gold.push_back(TokenVocab::kEos);
  std::vector<std::size_t> inputs;
  inputs.reserve(gold.size());
  inputs.push_back(TokenVocab::kBos);
  inputs.insert(inputs.end(), gold.begin(), gold.end() - 1);

  const Var words = nd::gather_rows(tape.param(*word_embed_), inputs);
  const auto p = decoder_.bind(tape);
  Var state = nd::tanh(bridge_(tape, h));
  std::vector<Var> states;
  states.reserve(inputs.size());
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    const std::size_t row = j;
    state = decoder_.step(p, nd::gather_rows(words, std::span<const std::size_t>(&row, 1)), state);
    states.push_back(state);
  }
  const Var logp = nd::log_softmax_rows(out_proj_(tape, nd::concat_rows(states)));
  Tensor select(gold.size(), tokens_.size());
  for (std::size_t j = 0; j < gold.size(); ++j) select(j, gold[j]) = 1.0;
  return nd::scale(nd::sum_all(nd::mul(logp, tape.constant(std::move(select)))), -1.0);
}

std::vector<std::size_t> NegotiationModel::greedy_decode(const Tensor& h, std::size_t max_len) const {
  nd::Tape tape;
  const auto p = decoder_.bind(tape);
  const auto out = out_proj_.bind(tape);
  const Var table = tape.param(*word_embed_);
  Var state = nd::tanh(bridge_(tape, tape.constant(h)));
  std::vector<std::size_t> ids;
  std::size_t prev = TokenVocab::kBos;
  while (ids.size() < max_len) {
    state = decoder_.step(p, nd::gather_rows(table, std::span<const std::size_t>(&prev, 1)), state);
    const Tensor& logits = out_proj_.apply(out, state).value();
    std::size_t best = TokenVocab::kEos;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.cols(); ++i) {
      if (i == TokenVocab::kBos) continue;
      if (logits(0, i) > best_v) {
        best_v = logits(0, i);
        best = i;
      }
    }
    ids.push_back(best);
    if (best == TokenVocab::kEos) break;
    prev = best;
  }
  return ids;
}

std::string NegotiationModel::realize(std::span<const std::size_t> ids, double listed) const {
  std::string out;
  for (std::size_t id : ids) {
    if (id == TokenVocab::kBos || id == TokenVocab::kEos) continue;
    const std::string& tok = tokens_.token(id);
    std::string word = tok;
    if (auto f = parse_placeholder(tok)) word = format_price(*f * listed);
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

}  // namespace negograph
