#include "negograph/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

namespace negograph {

using nd::Tensor;
using nd::Var;

ClassWeights compute_class_weights(std::span<const EncodedDialogue> train,
                                   std::size_t strategy_targets, std::size_t act_count,
                                   bool weight_strategies, bool weight_acts) {
  ClassWeights w;
  w.delta.assign(strategy_targets, 1.0);
  w.rho.assign(act_count, 1.0);
  std::vector<double> with(strategy_targets, 0.0), acts(act_count, 0.0);
  double total = 0.0;
  for (const auto& d : train) {
    for (const auto& t : d.turns) {
      total += 1.0;
      for (LabelId s : t.strategies) {
        if (s < strategy_targets) with[s] += 1.0;
      }
      if (t.act < act_count) acts[t.act] += 1.0;
    }
  }
  if (weight_strategies) {
    for (std::size_t j = 0; j < strategy_targets; ++j) {
      if (with[j] > 0) w.delta[j] = (total - with[j]) / with[j];
    }
  }
  if (weight_acts) {
    const double present =
        static_cast<double>(std::count_if(acts.begin(), acts.end(), [](double c) { return c > 0; }));
    for (std::size_t c = 0; c < act_count; ++c) {
      if (acts[c] > 0) w.rho[c] = total / (present * acts[c]);
    }
  }
  return w;
}

std::vector<double> strategy_target(const EncodedTurn& turn, std::size_t strategy_targets) {
  std::vector<double> y(strategy_targets, 0.0);
  for (LabelId s : turn.strategies) {
    if (s < strategy_targets) y[s] = 1.0;
  }
  return y;
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const EncodedDialogue> data,
                                                   std::span<const std::size_t> order,
                                                   std::size_t max_utterances) {
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> current;
  std::size_t turns = 0;
  for (std::size_t idx : order) {
    const std::size_t n = data[idx].turns.size();
    if (!current.empty() && turns + n > max_utterances) {
      batches.push_back(std::move(current));
      current.clear();
      turns = 0;
    }
    current.push_back(idx);
    turns += n;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

DialogueLoss dialogue_loss(nd::Tape& tape, const NegotiationModel& model,
                           const EncodedDialogue& d, const ClassWeights& weights, bool training,
                           nd::Xoshiro256* dropout_rng) {
  DialogueLoss out;
  const Var zero = tape.constant(Tensor(1, 1));
  out.joint = zero;
  if (d.turns.size() < 2) return out;
  const std::size_t count = d.turns.size() - 1;
  const auto pass = model.forward(tape, d, count, training, dropout_rng);
  const std::size_t targets = model.target_strategy_count();

  Var st = zero, da = zero, nlg = zero, r = zero;
  for (std::size_t t = 0; t < count; ++t) {
    const auto& step = pass.steps[t];
    const auto& next = d.turns[t + 1];
    st = nd::add(st, loss_strategy(nd::sigmoid(step.strategy_logits), strategy_target(next, targets),
                                   weights.delta));
    da = nd::add(da, loss_dialogue_act(step.act_logits, next.act, weights.rho));
    if (d.outcome_class) r = nd::add(r, loss_outcome(step.outcome_logits, *d.outcome_class));
    if (next.speaker == Speaker::seller) nlg = nd::add(nlg, model.decoder_loss(tape, step.h, next.tokens));
  }
  const auto& cfg = model.config();
  out.joint = loss_joint(nlg, st, da, r, {cfg.loss_alpha, cfg.loss_beta, cfg.loss_gamma});
  out.parts = {nlg.scalar(), st.scalar(), da.scalar(), r.scalar()};
  out.turns = count;
  return out;
}

namespace {

std::string parameter_norms(const nd::ParameterStore& store) {
  std::ostringstream os;
  bool first = true;
  for (const auto& p : store) {
    if (!first) os << ", ";
    first = false;
    os << p.name << "=" << p.value.l2_norm();
  }
  return os.str();
}

void shuffle(std::vector<std::size_t>& v, nd::Xoshiro256& rng) {
  // Fisher-Yates with our own generator so orders match across standard libraries
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

}  // namespace

FitResult fit(NegotiationModel& model, std::span<const EncodedDialogue> train,
              std::span<const EncodedDialogue> valid, const ClassWeights& weights,
              const FitOptions& options) {
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  const Config& cfg = model.config();
  auto& store = model.parameters();
  FitResult result;
  result.optimizer = nd::Adam(store, {cfg.lr, 0.9, 0.999, 1e-8, cfg.l2});
  auto shuffle_rng = nd::make_stream(cfg.seed, nd::Stream::shuffle);
  auto dropout_rng = nd::make_stream(cfg.seed, nd::Stream::dropout);
  const auto selection = valid.empty() ? train : valid;

  std::ofstream csv;
  if (!options.log_csv.empty()) {
    csv.open(options.log_csv);
    if (!csv) throw std::runtime_error("cannot write training log " + options.log_csv.string());
    csv << "epoch,loss_joint,loss_nlg,loss_strategy,loss_act,loss_outcome,"
           "valid_strategy_macro_f1,valid_strategy_micro_f1,valid_act_macro_f1,improved,config_hash\n";
  }
  const std::string hash = cfg.hash_hex();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Tensor> best;
  std::size_t stale = 0;
  const std::size_t epochs = options.max_epochs.value_or(cfg.max_epochs);

  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    const auto batches = make_batches(train, order, cfg.max_utterances_in_batch);
    EpochLog log;
    log.epoch = epoch;
    std::size_t total_turns = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::size_t batch_turns = 0;
      for (std::size_t idx : batches[b]) {
        batch_turns += train[idx].turns.empty() ? 0 : train[idx].turns.size() - 1;
      }
      if (batch_turns == 0) continue;
      store.zero_grad();
      for (std::size_t idx : batches[b]) {
        try {
          nd::Tape tape;
          auto dl = dialogue_loss(tape, model, train[idx], weights, true, &dropout_rng);
          if (dl.turns == 0) continue;
          const double joint = dl.joint.scalar();
          if (!std::isfinite(joint)) throw nd::NumericError("non-finite joint loss");
          tape.backward(nd::scale(dl.joint, 1.0 / static_cast<double>(batch_turns)));
          log.loss.nlg += dl.parts.nlg;
          log.loss.strategy += dl.parts.strategy;
          log.loss.act += dl.parts.act;
          log.loss.outcome += dl.parts.outcome;
          log.joint += joint;
        } catch (const nd::NumericError& e) {
          throw nd::NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(b) + ", dialogue '" + train[idx].id + "': " +
                                 e.what() + "; parameter norms: " + parameter_norms(store));
        }
      }
      total_turns += batch_turns;
      result.optimizer.step(store);
    }
    if (total_turns > 0) {
      const double n = static_cast<double>(total_turns);
      log.loss.nlg /= n;
      log.loss.strategy /= n;
      log.loss.act /= n;
      log.loss.outcome /= n;
      log.joint /= n;
    }

    EvalOptions eval;
    eval.generate = false;
    eval.strategy_labels = options.selection_labels;
    const Metrics m = evaluate(model, selection, eval);
    log.valid_strategy_macro_f1 = m.strategy_f1.macro;
    log.valid_strategy_micro_f1 = m.strategy_f1.micro;
    log.valid_act_macro_f1 = m.act_f1.macro;
    log.improved = log.valid_strategy_macro_f1 > result.best_valid;
    if (log.improved) {
      result.best_valid = log.valid_strategy_macro_f1;
      result.best_epoch = epoch;
      best.clear();
      for (const auto& p : store) best.push_back(p.value);
      stale = 0;
    } else {
      ++stale;
    }
    result.log.push_back(log);
    if (csv.is_open()) {
      char line[512];
      std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s\n",
                    epoch, log.joint, log.loss.nlg, log.loss.strategy, log.loss.act,
                    log.loss.outcome, log.valid_strategy_macro_f1, log.valid_strategy_micro_f1,
                    log.valid_act_macro_f1, log.improved ? 1 : 0, hash.c_str());
      csv << line << std::flush;
    }
    if (options.on_epoch) options.on_epoch(log);
    if (stale >= cfg.patience) {
      result.stopped_early = true;
      break;
    }
  }

  if (!best.empty()) {
    std::size_t i = 0;
    for (auto& p : store) p.value = best[i++];
  }
  return result;
}

// ---- evaluation ---------------------------------------------------------------

namespace {

std::vector<std::string> token_strings(const TokenVocab& vocab, std::span<const std::size_t> ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) {
    if (id == TokenVocab::kBos || id == TokenVocab::kEos) continue;
    out.push_back(vocab.token(id));
  }
  return out;
}

nlohmann::json labels_of(const LabelVocab& vocab, const std::vector<bool>& khot) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t j = 0; j < khot.size(); ++j) {
    if (khot[j]) out.push_back(vocab.label(j));
  }
  return out;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

Metrics evaluate(const NegotiationModel& model, std::span<const EncodedDialogue> data,
                 const EvalOptions& options) {
  const std::size_t targets = model.target_strategy_count();
  const std::size_t acts = model.dialogue_acts().size();
  LabelMatrix st_gold, st_pred, da_gold_m;
  ScoreMatrix st_scores, da_scores;
  std::vector<std::size_t> da_gold, da_pred, rc_gold, rc_pred;
  std::vector<std::vector<std::string>> hyps, refs;

  for (const auto& d : data) {
    if (d.turns.size() < 2) continue;
    const bool want_trace = options.traces != nullptr;
    const std::size_t count = want_trace ? d.turns.size() : d.turns.size() - 1;
    nd::Tape tape;
    const auto pass = model.forward(tape, d, count, false, nullptr, want_trace);
    if (want_trace && !pass.strategy_traces.empty()) options.traces->push_back(pass.strategy_traces.back());

    for (std::size_t t = 0; t + 1 < d.turns.size(); ++t) {
      const auto& step = pass.steps[t];
      const auto& next = d.turns[t + 1];
      const auto sp = predict_strategies(step.strategy_logits.value().values());
      std::vector<bool> gold(targets, false);
      for (LabelId s : next.strategies) {
        if (s < targets) gold[s] = true;
      }
      st_gold.push_back(gold);
      st_pred.push_back(sp.khot);
      st_scores.push_back(sp.probabilities);

      const auto da_probs = softmax(step.act_logits.value().values());
      const std::size_t da_hat = argmax(da_probs);
      da_gold.push_back(next.act);
      da_pred.push_back(da_hat);
      std::vector<bool> da_onehot(acts, false);
      da_onehot[next.act] = true;
      da_gold_m.push_back(std::move(da_onehot));
      da_scores.push_back(da_probs);

      const auto outcome_probs = softmax(step.outcome_logits.value().values());
      if (d.outcome_class) {
        rc_gold.push_back(static_cast<std::size_t>(*d.outcome_class));
        rc_pred.push_back(argmax(outcome_probs) + 1);
      }

      std::vector<std::size_t> generated;
      if (options.generate && next.speaker == Speaker::seller) {
        generated = model.greedy_decode(step.h.value(), model.config().max_decode_len);
        hyps.push_back(token_strings(model.tokens(), generated));
        refs.push_back(token_strings(model.tokens(), next.tokens));
      }

      if (options.predictions != nullptr) {
        nlohmann::json line = {
            {"dialogue", d.id},
            {"turn", t + 1},
            {"gold_st", labels_of(model.strategies(), gold)},
            {"pred_st", labels_of(model.strategies(), sp.khot)},
            {"st_probs", sp.probabilities},
            {"gold_da", model.dialogue_acts().label(next.act)},
            {"pred_da", model.dialogue_acts().label(da_hat)},
            {"outcome_probs", outcome_probs},
            {"gold_outcome", d.outcome_class ? nlohmann::json(*d.outcome_class) : nlohmann::json(nullptr)}};
        line["da_probs"] = da_probs;
        if (!options.config_hash.empty()) line["config_hash"] = options.config_hash;
        if (!generated.empty()) {
          line["generated"] = model.realize(generated, d.listed_price);
          line["generated_tokens"] = hyps.back();
          line["reference_tokens"] = refs.back();
        }
        *options.predictions << line.dump() << '\n';
      }
    }
  }
  if (st_gold.empty()) throw std::invalid_argument("evaluate: no predictable turns in the evaluation set");

  Metrics m;
  m.instances = st_gold.size();
  m.strategy_f1 = multilabel_f1(st_gold, st_pred, options.strategy_labels);
  m.strategy_auc = multilabel_auc(st_gold, st_scores, options.strategy_labels);
  m.act_f1 = multiclass_f1(da_gold, da_pred, acts);
  m.act_auc = multilabel_auc(da_gold_m, da_scores);
  if (!hyps.empty()) {
    m.bleu = corpus_bleu(hyps, refs);
    m.generated = hyps.size();
  }
  if (!rc_gold.empty()) {
    m.rc_acc = accuracy(rc_gold, rc_pred);
    m.outcome_instances = rc_gold.size();
  }
  return m;
}

Metrics score_predictions(std::istream& in, const LabelVocab& strategies, const LabelVocab& acts,
                          const std::vector<std::size_t>& strategy_labels, std::string* config_hash) {
  std::size_t targets = strategies.size();
  if (targets > 0 && strategies.label(targets - 1) == "<start>") --targets;
  LabelMatrix st_gold, st_pred, da_gold_m;
  ScoreMatrix st_scores, da_scores;
  std::vector<std::size_t> da_gold, da_pred, rc_gold, rc_pred;
  std::vector<std::vector<std::string>> hyps, refs;

  auto khot = [&](const nlohmann::json& names) {
    std::vector<bool> v(targets, false);
    for (const auto& n : names) {
      const auto id = strategies.id(n.get<std::string>());
      if (id < targets) v[id] = true;
    }
    return v;
  };
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (config_hash != nullptr && config_hash->empty() && j.contains("config_hash"))
        *config_hash = j["config_hash"].get<std::string>();
      st_gold.push_back(khot(j.at("gold_st")));
      st_pred.push_back(khot(j.at("pred_st")));
      auto probs = j.at("st_probs").get<std::vector<double>>();
      if (probs.size() != targets) throw std::invalid_argument("st_probs has the wrong length");
      st_scores.push_back(std::move(probs));

      const auto gold_da = acts.id(j.at("gold_da").get<std::string>());
      da_gold.push_back(gold_da);
      da_pred.push_back(acts.id(j.at("pred_da").get<std::string>()));
      std::vector<bool> onehot(acts.size(), false);
      onehot[gold_da] = true;
      da_gold_m.push_back(std::move(onehot));
      auto dp = j.at("da_probs").get<std::vector<double>>();
      if (dp.size() != acts.size()) throw std::invalid_argument("da_probs has the wrong length");
      da_scores.push_back(std::move(dp));

      if (j.contains("gold_outcome") && !j["gold_outcome"].is_null()) {
        const auto op = j.at("outcome_probs").get<std::vector<double>>();
        rc_gold.push_back(j["gold_outcome"].get<std::size_t>());
        rc_pred.push_back(argmax(op) + 1);
      }
      if (j.contains("generated_tokens")) {
        hyps.push_back(j["generated_tokens"].get<std::vector<std::string>>());
        refs.push_back(j.at("reference_tokens").get<std::vector<std::string>>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(number, e.what());
    } catch (const std::invalid_argument& e) {
      throw SchemaError(number, e.what());
    }
  }
  if (st_gold.empty()) throw std::invalid_argument("score_predictions: no prediction lines");

  Metrics m;
  m.instances = st_gold.size();
  m.strategy_f1 = multilabel_f1(st_gold, st_pred, strategy_labels);
  m.strategy_auc = multilabel_auc(st_gold, st_scores, strategy_labels);
  m.act_f1 = multiclass_f1(da_gold, da_pred, acts.size());
  m.act_auc = multilabel_auc(da_gold_m, da_scores);
  if (!hyps.empty()) {
    m.bleu = corpus_bleu(hyps, refs);
    m.generated = hyps.size();
  }
  if (!rc_gold.empty()) {
    m.rc_acc = accuracy(rc_gold, rc_pred);
    m.outcome_instances = rc_gold.size();
  }
  return m;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  auto f1 = [](const F1Scores& s) {
    return nlohmann::json{{"macro", s.macro}, {"micro", s.micro}, {"weighted", s.weighted}};
  };
  auto auc = [](const AucScores& s) {
    return nlohmann::json{{"macro", finite_or_null(s.macro)},
                          {"micro", finite_or_null(s.micro)},
                          {"weighted", finite_or_null(s.weighted)},
                          {"defined_labels", s.defined_labels}};
  };
  return {{"instances", m.instances},
          {"strategy", {{"f1", f1(m.strategy_f1)}, {"roc_auc", auc(m.strategy_auc)}}},
          {"dialogue_act", {{"f1", f1(m.act_f1)}, {"roc_auc", auc(m.act_auc)}}},
          {"bleu", m.bleu ? nlohmann::json(*m.bleu) : nlohmann::json(nullptr)},
          {"generated", m.generated},
          {"rc_acc", m.rc_acc ? nlohmann::json(*m.rc_acc) : nlohmann::json(nullptr)},
          {"outcome_instances", m.outcome_instances}};
}

}  // namespace negograph
