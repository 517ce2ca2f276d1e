#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "negograph/corpus.hpp"

namespace negograph {

struct TagResult {
  /// Tokens with prices replaced by placeholders.
  std::vector<std::string> tokens;
  std::vector<LabelId> strategies;
  LabelId act = 0;
  std::vector<PriceMention> prices;
};

/// Rule-table tagger for live buyer turns: keyword, phrase, regex and price
/// rules mapping text to strategy labels and one dialogue act. A rough
/// stand-in for the feature extractors behind the corpus annotations.
class KeywordTagger {
 public:
  enum class Kind { word, phrase, regex, price, first_price };
  struct Rule {
    Kind kind = Kind::word;
    bool act = false;
    LabelId label = 0;
    std::string pattern;
    std::vector<std::string> phrase;
    std::regex compiled;
  };

  /// Tab separated "kind target [pattern]" lines, '#' comments. Targets are
  /// "st:<strategy>" or "da:<act>". Throws std::invalid_argument with the
  /// line number on malformed rules and VocabularyError on unknown labels.
  static KeywordTagger parse(std::istream& in, const LabelVocab& strategies, const LabelVocab& acts);
  static KeywordTagger load(const std::filesystem::path& path, const LabelVocab& strategies,
                            const LabelVocab& acts);
  /// The rule table shipped with the library.
  static KeywordTagger builtin(const LabelVocab& strategies = default_strategy_vocab(),
                               const LabelVocab& acts = default_dialogue_act_vocab());
  static std::string_view builtin_rules();

  /// `price_seen` tells whether an earlier turn already mentioned a price.
  TagResult tag(std::string_view text, double listed, bool price_seen) const;

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
  LabelId unknown_act_ = 0;
};

}  // namespace negograph
