#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "negograph/losses.hpp"
#include "negograph/metrics.hpp"
#include "negograph/model.hpp"
#include "negograph/optim.hpp"

namespace negograph {

/// delta_j = (#utterances without strategy j) / (#utterances with j);
/// rho_c = N / (K * n_c) over the K dialogue acts that occur. Labels that never
/// occur get weight 1.
struct ClassWeights {
  std::vector<double> delta;
  std::vector<double> rho;
};

ClassWeights compute_class_weights(std::span<const EncodedDialogue> train,
                                   std::size_t strategy_targets, std::size_t act_count,
                                   bool weight_strategies = true, bool weight_acts = true);

/// Strategy k-hot of a turn restricted to the predicted labels.
std::vector<double> strategy_target(const EncodedTurn& turn, std::size_t strategy_targets);

/// Groups dialogue indices in the given order into batches whose total turn
/// count stays within `max_utterances` (an oversized dialogue forms its own).
std::vector<std::vector<std::size_t>> make_batches(std::span<const EncodedDialogue> data,
                                                   std::span<const std::size_t> order,
                                                   std::size_t max_utterances);

struct EpochLog {
  std::size_t epoch = 0;
  LossParts loss;  // means per predicted turn
  double joint = 0.0;
  double valid_strategy_macro_f1 = 0.0;
  double valid_strategy_micro_f1 = 0.0;
  double valid_act_macro_f1 = 0.0;
  bool improved = false;
};

struct FitOptions {
  /// CSV written (and flushed) after every epoch when non-empty.
  std::filesystem::path log_csv;
  std::function<void(const EpochLog&)> on_epoch;
  /// Overrides the configured epoch budget when set.
  std::optional<std::size_t> max_epochs;
  /// Labels scored for model selection; all predicted labels if empty.
  std::vector<std::size_t> selection_labels;
};

struct FitResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_valid = -1.0;
  bool stopped_early = false;
  nd::Adam optimizer;
};

/// Adam over shuffled dialogue batches, model selection on validation strategy
/// macro-F1 with early stopping. The best parameters are restored at the end.
/// A non-finite loss aborts with nd::NumericError naming the batch.
FitResult fit(NegotiationModel& model, std::span<const EncodedDialogue> train,
              std::span<const EncodedDialogue> valid, const ClassWeights& weights,
              const FitOptions& options = {});

/// Loss parts summed over the predicted turns of one dialogue (on `tape`).
struct DialogueLoss {
  nd::Var joint;
  LossParts parts;
  std::size_t turns = 0;
};
DialogueLoss dialogue_loss(nd::Tape& tape, const NegotiationModel& model,
                           const EncodedDialogue& d, const ClassWeights& weights, bool training,
                           nd::Xoshiro256* dropout_rng);

struct EvalOptions {
  bool generate = true;
  /// Restrict strategy F1/AUC to these label ids (all predicted labels if empty).
  std::vector<std::size_t> strategy_labels;
  /// JSONL prediction dump, one line per predicted turn.
  std::ostream* predictions = nullptr;
  /// Collects the full-dialogue strategy-graph trace of every dialogue.
  std::vector<AttentionTrace>* traces = nullptr;
  /// Stamped on every prediction line when non-empty.
  std::string config_hash;
};

struct Metrics {
  std::size_t instances = 0;
  F1Scores strategy_f1;
  AucScores strategy_auc;
  F1Scores act_f1;
  AucScores act_auc;
  std::optional<double> bleu;
  std::size_t generated = 0;
  std::optional<double> rc_acc;
  std::size_t outcome_instances = 0;
};

/// Scores next-turn predictions over every prefix of every dialogue.
/// Throws std::invalid_argument on an empty set.
Metrics evaluate(const NegotiationModel& model, std::span<const EncodedDialogue> data,
                 const EvalOptions& options = {});

/// Rescores a prediction dump written by evaluate(). The first config hash
/// found in the dump is stored in `config_hash` when given.
Metrics score_predictions(std::istream& in, const LabelVocab& strategies, const LabelVocab& acts,
                          const std::vector<std::size_t>& strategy_labels = {},
                          std::string* config_hash = nullptr);

nlohmann::json metrics_to_json(const Metrics& m);

}  // namespace negograph
