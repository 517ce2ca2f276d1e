#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "negograph/vocab.hpp"

namespace negograph {

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::size_t record, const std::string& what)
      : std::runtime_error("record " + std::to_string(record) + ": " + what), record_(record) {}
  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

enum class Speaker { buyer, seller };
enum class FinalAction { offer, accept, reject, quit };

std::string_view to_string(Speaker s);
std::string_view to_string(FinalAction a);
Speaker parse_speaker(std::string_view s);
FinalAction parse_final_action(std::string_view s);

struct Scenario {
  double listed_price = 0.0;
  double buyer_target_price = 0.0;
  std::string title;
  std::string description;

  /// Throws DomainError unless listed > 0 and listed != buyer target.
  void validate() const;
};

struct PriceMention {
  std::size_t position = 0;
  double amount = 0.0;
  friend bool operator==(const PriceMention&, const PriceMention&) = default;
};

struct DialogueTurn {
  Speaker speaker = Speaker::buyer;
  std::string text;
  /// Prices already replaced by placeholders.
  std::vector<std::string> tokens;
  LabelId dialogue_act = 0;
  /// Sorted, unique strategy ids.
  std::vector<LabelId> strategies;
  std::vector<PriceMention> raw_prices;
};

struct Outcome {
  std::optional<double> sale_price;
  FinalAction final_action = FinalAction::quit;
};

struct Dialogue {
  std::string id;
  Scenario scenario;
  std::vector<DialogueTurn> turns;
  Outcome outcome;

  /// Sale-to-list ratio, when a sale happened.
  std::optional<double> ratio() const;
};

struct Corpus {
  std::vector<Dialogue> dialogues;
  LabelVocab strategies = default_strategy_vocab();
  LabelVocab dialogue_acts = default_dialogue_act_vocab();

  std::size_t turn_count() const;
};

struct LoadOptions {
  std::size_t min_turns = 5;
  LabelVocab strategies = default_strategy_vocab();
  LabelVocab dialogue_acts = default_dialogue_act_vocab();
};

/// Reads one JSON record per line. Blank lines are skipped. Dialogues with
/// fewer than `min_turns` turns are dropped; order is preserved.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});
Corpus read_corpus(std::istream& in, const LoadOptions& options = {});

/// Parses one record. `index` is only used for error messages and the
/// default dialogue id.
Dialogue parse_dialogue(const nlohmann::json& record, std::size_t index,
                        const LabelVocab& strategies, const LabelVocab& dialogue_acts);
nlohmann::json dialogue_to_json(const Dialogue& d, const LabelVocab& strategies,
                                const LabelVocab& dialogue_acts);

void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Lowercased word/number/punctuation tokens; "$35" and "35.5" stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Replaces price mentions with placeholders relative to `listed`. A token is
/// a price when it carries a '$' or is a bare number between 0.3x and 2x the
/// listed price. Returns the mentions found.
std::vector<PriceMention> replace_prices(std::vector<std::string>& tokens, double listed);

}  // namespace negograph
