#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "negograph/corpus.hpp"

namespace negograph {

/// Whenever `trigger` occurs at turn t, `consequence` is placed at turn
/// t + lag with the given probability.
struct PlantRule {
  LabelId trigger = 0;
  LabelId consequence = 0;
  std::size_t lag = 1;
  double probability = 1.0;
};

struct SynthOptions {
  std::vector<PlantRule> rules;
  std::size_t dialogues = 500;
  std::size_t turns = 8;
  /// Per-turn Bernoulli rate of every label not used by a rule.
  double noise_rate = 0.05;
  /// Chance that a turn carries one (uniformly chosen) rule trigger.
  double trigger_rate = 0.4;
  std::size_t vocabulary_words = 50;
  std::uint64_t seed = 1;
};

/// Three deterministic lag-1 rules over disjoint labels:
/// propose -> trade_in, hedge_count -> politeness_gratitude,
/// personal_concern -> politeness_please.
std::vector<PlantRule> default_rules(const LabelVocab& strategies);

/// "trigger>consequence[:lag[:probability]]", comma separated.
std::vector<PlantRule> parse_rules(const std::string& spec, const LabelVocab& strategies);

/// Throws std::invalid_argument for lag 0, probabilities outside [0, 1],
/// unknown label ids, or a label used both as trigger and consequence.
void validate_rules(const std::vector<PlantRule>& rules, const LabelVocab& strategies);

/// Seeded synthetic corpus. Turn 0 opens with <start>; turn t carries the
/// consequences of triggers at t - lag plus noise and at most one new
/// trigger. Dialogue acts cycle a fixed pattern; utterances draw from
/// overlapping per-label word pools; sale ratios cycle through five bands so
/// outcome classes are balanced.
Corpus generate(const SynthOptions& options, const LabelVocab& strategies = default_strategy_vocab(),
                const LabelVocab& dialogue_acts = default_dialogue_act_vocab());

/// Labels that appear as a rule consequence, ascending.
std::vector<LabelId> consequence_labels(const std::vector<PlantRule>& rules);

}  // namespace negograph
