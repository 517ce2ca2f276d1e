#include "negograph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "negograph/price.hpp"
#include "negograph/rng.hpp"

namespace negograph {

namespace {

constexpr std::string_view kWords[] = {
    "the",   "a",      "bike",   "chair",  "price", "deal",   "good",  "great", "cash",   "pick",
    "up",    "today",  "condition", "new", "used",  "offer",  "maybe", "would", "could",  "sure",
    "thanks", "please", "hello", "family", "friend", "trade", "phone", "lamp",  "table",  "car",
    "low",   "high",   "fair",   "firm",   "deliver", "tomorrow", "works", "fine", "need", "want",
    "really", "think", "perhaps", "honest", "kind",  "interested", "still", "available", "how", "much"};
constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);

// Dialogue acts cycled by turn.
constexpr std::string_view kActPattern[] = {"intro",  "inquiry", "init-price", "counter-price",
                                            "inform", "agree",   "counter-price", "insist"};

bool prices_turn(std::string_view act) { return act == "init-price" || act == "counter-price"; }

}  // namespace

std::vector<PlantRule> default_rules(const LabelVocab& strategies) {
  return {{strategies.id("propose"), strategies.id("trade_in"), 1, 1.0},
          {strategies.id("hedge_count"), strategies.id("politeness_gratitude"), 1, 1.0},
          {strategies.id("personal_concern"), strategies.id("politeness_please"), 1, 1.0}};
}

std::vector<PlantRule> parse_rules(const std::string& spec, const LabelVocab& strategies) {
  std::vector<PlantRule> rules;
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto arrow = item.find('>');
    if (arrow == std::string::npos) throw std::invalid_argument("rule '" + item + "' lacks '>'");
    PlantRule r;
    r.trigger = strategies.id(item.substr(0, arrow));
    std::stringstream rest(item.substr(arrow + 1));
    std::string part;
    std::getline(rest, part, ':');
    r.consequence = strategies.id(part);
    try {
      if (std::getline(rest, part, ':')) r.lag = std::stoul(part);
      if (std::getline(rest, part, ':')) r.probability = std::stod(part);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("rule '" + item + "' has a malformed lag or probability");
    }
    rules.push_back(r);
  }
  validate_rules(rules, strategies);
  return rules;
}

void validate_rules(const std::vector<PlantRule>& rules, const LabelVocab& strategies) {
  std::set<LabelId> triggers, consequences;
  for (const auto& r : rules) {
    if (r.lag == 0) throw std::invalid_argument("rule lag must be at least 1");
    if (!(r.probability >= 0.0 && r.probability <= 1.0))
      throw std::invalid_argument("rule probability must lie in [0, 1]");
    if (r.trigger >= strategies.size() || r.consequence >= strategies.size())
      throw std::invalid_argument("rule refers to an unknown strategy id");
    if (strategies.label(r.trigger) == "<start>" || strategies.label(r.consequence) == "<start>")
      throw std::invalid_argument("<start> cannot take part in a rule");
    triggers.insert(r.trigger);
    consequences.insert(r.consequence);
  }
  for (auto t : triggers)
    if (consequences.count(t))
      throw std::invalid_argument("strategy '" + strategies.label(t) +
                                  "' is both a trigger and a consequence");
}

std::vector<LabelId> consequence_labels(const std::vector<PlantRule>& rules) {
  std::set<LabelId> out;
  for (const auto& r : rules) out.insert(r.consequence);
  return {out.begin(), out.end()};
}

Corpus generate(const SynthOptions& options, const LabelVocab& strategies,
                const LabelVocab& dialogue_acts) {
  validate_rules(options.rules, strategies);
  if (options.vocabulary_words == 0 || options.vocabulary_words > kWordCount)
    throw std::invalid_argument("vocabulary_words must lie in [1, " + std::to_string(kWordCount) + "]");

  const LabelId start = strategies.id("<start>");
  std::set<LabelId> rule_labels;
  for (const auto& r : options.rules) {
    rule_labels.insert(r.trigger);
    rule_labels.insert(r.consequence);
  }
  std::vector<LabelId> noise_labels;
  for (LabelId l = 0; l < strategies.size(); ++l)
    if (l != start && !rule_labels.count(l)) noise_labels.push_back(l);

  const std::size_t words = options.vocabulary_words;
  auto rng = nd::make_stream(options.seed, nd::Stream::synth);
  auto uniform = [&rng] { return rng.uniform(); };
  auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng.below(n)); };

  Corpus corpus;
  corpus.strategies = strategies;
  corpus.dialogue_acts = dialogue_acts;
  corpus.dialogues.reserve(options.dialogues);

  for (std::size_t i = 0; i < options.dialogues; ++i) {
    Dialogue d;
    d.id = "synth-" + std::to_string(i);
    d.scenario.listed_price = std::round(100.0 + 900.0 * uniform());
    d.scenario.buyer_target_price = std::round(d.scenario.listed_price * 0.7);
    d.scenario.title = "item " + std::to_string(i);

    std::vector<std::set<LabelId>> sets(options.turns);
    if (!sets.empty()) sets[0].insert(start);
    for (std::size_t t = 0; t < options.turns; ++t) {
      auto& s = sets[t];
      for (auto l : noise_labels)
        if (uniform() < options.noise_rate) s.insert(l);
      if (!options.rules.empty() && t + 1 < options.turns && uniform() < options.trigger_rate) {
        const auto& rule = options.rules[pick(options.rules.size())];
        s.insert(rule.trigger);
      }
      for (const auto& r : options.rules) {
        if (!s.count(r.trigger) || t + r.lag >= options.turns) continue;
        if (r.probability >= 1.0 || uniform() < r.probability) sets[t + r.lag].insert(r.consequence);
      }
    }

    for (std::size_t t = 0; t < options.turns; ++t) {
      DialogueTurn turn;
      turn.speaker = t % 2 == 0 ? Speaker::buyer : Speaker::seller;
      const auto act = kActPattern[t % std::size(kActPattern)];
      turn.dialogue_act = dialogue_acts.id(act);
      turn.strategies.assign(sets[t].begin(), sets[t].end());
      for (auto l : turn.strategies) {
        if (l == start) continue;
        // Overlapping three-word pools per label.
        for (int k = 0; k < 2; ++k) turn.tokens.emplace_back(kWords[(3 * l + pick(3)) % words]);
      }
      for (int k = 0; k < 2; ++k) turn.tokens.emplace_back(kWords[pick(words)]);
      if (prices_turn(act)) {
        const double fraction = turn.speaker == Speaker::buyer ? 0.7 + 0.05 * static_cast<double>(pick(4))
                                                               : 1.0 - 0.05 * static_cast<double>(pick(3));
        turn.tokens.push_back(grid_placeholder(fraction));
      }
      std::string text;
      for (const auto& tok : turn.tokens) {
        if (!text.empty()) text += ' ';
        text += tok;
      }
      turn.text = std::move(text);
      d.turns.push_back(std::move(turn));
    }

    // Five ratio bands in rotation keep the outcome classes balanced.
    const double ratio = 0.1 + 0.2 * static_cast<double>(i % 5) + 0.16 * (uniform() - 0.5);
    const double sale = d.scenario.buyer_target_price +
                        ratio * (d.scenario.listed_price - d.scenario.buyer_target_price);
    d.outcome.sale_price = std::round(sale * 100.0) / 100.0;
    d.outcome.final_action = FinalAction::accept;
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace negograph
