#include "negograph/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "negograph/corpus.hpp"
#include "negograph/price.hpp"

namespace negograph {

LabelVocab::LabelVocab(std::string kind, std::vector<std::string> labels)
    : kind_(std::move(kind)), labels_(std::move(labels)) {
  for (LabelId i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw VocabularyError(kind_ + " vocabulary: duplicate label '" + labels_[i] + "'");
    }
  }
}

LabelVocab LabelVocab::load(const std::filesystem::path& path, std::string kind) {
  std::ifstream in(path);
  if (!in) throw VocabularyError("cannot open " + kind + " vocabulary " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    labels.push_back(line);
  }
  return LabelVocab(std::move(kind), std::move(labels));
}

void LabelVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw VocabularyError("cannot write " + path.string());
  for (const auto& l : labels_) out << l << '\n';
}

LabelId LabelVocab::id(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) {
    throw VocabularyError("unknown " + kind_ + " label '" + std::string(label) + "'");
  }
  return it->second;
}

bool LabelVocab::contains(std::string_view label) const {
  return index_.count(std::string(label)) != 0;
}

const std::string& LabelVocab::label(LabelId id) const {
  if (id >= labels_.size()) {
    throw VocabularyError(kind_ + " id " + std::to_string(id) + " out of range");
  }
  return labels_[id];
}

LabelVocab default_strategy_vocab() {
  return LabelVocab("strategy", {"first_person_singular_count",
                                 "pos_sentiment",
                                 "number_of_diff_dic_pos",
                                 "third_person_singular",
                                 "hedge_count",
                                 "number_of_diff_dic_neg",
                                 "personal_concern",
                                 "propose",
                                 "politeness_greet",
                                 "assertive_count",
                                 "neg_sentiment",
                                 "factive_count",
                                 "politeness_gratitude",
                                 "first_person_plural_count",
                                 "liwc_certainty",
                                 "liwc_informal",
                                 "third_person_plural",
                                 "trade_in",
                                 "politeness_please",
                                 "family",
                                 "friend",
                                 "<start>"});
}

LabelVocab default_dialogue_act_vocab() {
  return LabelVocab("dialogue act", {"intro", "inquiry", "init-price", "counter-price", "unknown",
                                     "agree", "disagree", "inform", "vague-price", "insist",
                                     "<offer>", "<accept>", "<reject>", "<quit>"});
}

// ---- token vocabulary -----------------------------------------------------

TokenVocab::TokenVocab() {
  push(std::string(kUnkToken));
  push(std::string(kBosToken));
  push(std::string(kEosToken));
  for (auto& g : grid_placeholders()) push(std::move(g));
}

void TokenVocab::push(std::string token) {
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

TokenVocab TokenVocab::build(const Corpus& corpus, std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& d : corpus.dialogues)
    for (const auto& t : d.turns)
      for (const auto& tok : t.tokens) ++counts[tok];

  TokenVocab v;
  std::vector<std::pair<std::string, std::size_t>> items;
  for (auto& [tok, n] : counts) {
    if (is_placeholder(tok) || v.index_.count(tok) != 0 || n < min_count) continue;
    items.emplace_back(tok, n);
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (auto& [tok, n] : items) v.push(tok);
  return v;
}

TokenVocab TokenVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw VocabularyError("cannot open token vocabulary " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return from_tokens(lines);
}

TokenVocab TokenVocab::from_tokens(const std::vector<std::string>& tokens) {
  TokenVocab v;
  if (tokens.size() < v.tokens_.size() ||
      !std::equal(v.tokens_.begin(), v.tokens_.end(), tokens.begin())) {
    throw VocabularyError("token vocabulary lacks the special/grid prefix");
  }
  for (std::size_t i = v.tokens_.size(); i < tokens.size(); ++i) v.push(tokens[i]);
  return v;
}

void TokenVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw VocabularyError("cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

std::size_t TokenVocab::id(std::string_view token) const {
  if (auto f = parse_placeholder(token)) {
    return index_.at(grid_placeholder(*f));
  }
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::size_t count_surface_types(const Corpus& corpus) {
  std::set<std::string> types;
  for (const auto& d : corpus.dialogues)
    for (const auto& t : d.turns)
      for (const auto& tok : t.tokens) types.insert(tok);
  return types.size();
}

}  // namespace negograph
