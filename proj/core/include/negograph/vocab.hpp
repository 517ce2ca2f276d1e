#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace negograph {

class VocabularyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LabelId = std::size_t;

/// Fixed-order label list; id = position. Used for strategies and dialogue acts.
class LabelVocab {
 public:
  LabelVocab() = default;
  LabelVocab(std::string kind, std::vector<std::string> labels);

  /// One label per line, line number = id.
  static LabelVocab load(const std::filesystem::path& path, std::string kind);
  void save(const std::filesystem::path& path) const;

  LabelId id(std::string_view label) const;
  bool contains(std::string_view label) const;
  const std::string& label(LabelId id) const;
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& kind() const { return kind_; }

  friend bool operator==(const LabelVocab& a, const LabelVocab& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::string kind_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelId> index_;
};

/// 21 negotiation strategies followed by the <start> marker (id 21).
LabelVocab default_strategy_vocab();
/// 10 utterance acts followed by the 4 outcome acts.
LabelVocab default_dialogue_act_vocab();

inline constexpr std::size_t kContentStrategyCount = 21;
inline constexpr LabelId kStartStrategy = 21;
inline constexpr std::size_t kDialogueActCount = 14;

inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

struct Corpus;

/// Word vocabulary: specials, then the 41-token price grid, then corpus
/// tokens ordered by descending frequency with lexicographic tie-break.
class TokenVocab {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kGridBegin = 3;
  static constexpr std::size_t kGridSize = 41;

  TokenVocab();

  static TokenVocab build(const Corpus& corpus, std::size_t min_count = 1);
  static TokenVocab load(const std::filesystem::path& path);
  /// Full token list as saved; must start with the special and grid tokens.
  static TokenVocab from_tokens(const std::vector<std::string>& tokens);
  void save(const std::filesystem::path& path) const;

  /// Placeholder tokens map onto their nearest grid token; unknown -> <unk>.
  std::size_t id(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  bool is_grid(std::size_t id) const { return id >= kGridBegin && id < kGridBegin + kGridSize; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const TokenVocab& a, const TokenVocab& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void push(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Distinct surface tokens in the corpus with placeholders kept at their
/// loaded precision (no grid quantization).
std::size_t count_surface_types(const Corpus& corpus);

}  // namespace negograph
