#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "negograph/config.hpp"
#include "negograph/corpus.hpp"

namespace negograph::testing {

struct TurnSpec {
  Speaker speaker;
  std::string text;
  std::string act;
  std::vector<std::string> strategies;
};

inline Dialogue make_dialogue(const std::string& id, double listed, double target,
                              const std::vector<TurnSpec>& turns,
                              std::optional<double> sale = std::nullopt,
                              FinalAction final_action = FinalAction::quit) {
  const auto st = default_strategy_vocab();
  const auto da = default_dialogue_act_vocab();
  nlohmann::json record;
  record["id"] = id;
  record["scenario"] = {{"listed_price", listed}, {"buyer_target_price", target}, {"title", "bike"}};
  record["turns"] = nlohmann::json::array();
  for (const auto& t : turns) {
    record["turns"].push_back({{"speaker", to_string(t.speaker)},
                               {"text", t.text},
                               {"dialogue_act", t.act},
                               {"strategies", t.strategies}});
  }
  record["outcome"] = {{"sale_price", sale ? nlohmann::json(*sale) : nlohmann::json(nullptr)},
                       {"final_action", to_string(final_action)}};
  return parse_dialogue(record, 0, st, da);
}

/// Three short dialogues in the corpus format.
inline Corpus toy_corpus() {
  using S = Speaker;
  Corpus c;
  c.dialogues.push_back(make_dialogue(
      "toy-0", 40, 36,
      {{S::buyer, "hi is the bike still available ?", "intro", {"politeness_greet"}},
       {S::seller, "yes it is , thanks for asking", "inform", {"politeness_gratitude"}},
       {S::buyer, "would you take $30 ?", "init-price", {"propose", "hedge_count"}},
       {S::seller, "i could do $35 , it is almost new", "counter-price", {"propose", "liwc_certainty"}},
       {S::buyer, "ok deal", "agree", {"pos_sentiment"}}},
      35.0, FinalAction::accept));
  c.dialogues.push_back(make_dialogue(
      "toy-1", 120, 90,
      {{S::buyer, "hello , i need it for my family", "intro", {"politeness_greet", "family"}},
       {S::seller, "great , it is in good shape", "inform", {"pos_sentiment"}},
       {S::buyer, "can you do $90 please", "init-price", {"propose", "politeness_please"}},
       {S::seller, "no , $110 is my lowest", "counter-price", {"propose", "neg_sentiment"}},
       {S::buyer, "i will pass then", "disagree", {"first_person_singular_count"}}},
      std::nullopt, FinalAction::quit));
  c.dialogues.push_back(make_dialogue(
      "toy-2", 300, 200,
      {{S::buyer, "hey , does it come with a case ?", "inquiry", {"politeness_greet"}},
       {S::seller, "yes , and i can throw in a charger", "inform", {"trade_in"}},
       {S::buyer, "would $220 work ? i can pick up today", "init-price", {"propose", "trade_in"}},
       {S::seller, "make it $250 and it is yours", "counter-price", {"propose"}},
       {S::buyer, "thanks , $250 works", "agree", {"politeness_gratitude", "propose"}},
       {S::seller, "great", "agree", {"pos_sentiment"}}},
      250.0, FinalAction::accept));
  return c;
}

/// Small dimensions so full-model tests stay fast.
inline Config tiny_config() {
  Config c;
  c.word_embedding_dim = 6;
  c.dialogue_context_embedding = 5;
  c.dialogue_context_dropout = 0.0;
  c.context_hidden = 6;
  c.hidden_dim = 5;
  c.projection_strategy = 4;
  c.projection_da = 4;
  c.rnn_hidden_size = 4;
  c.decoder_hidden = 6;
  c.max_target_len = 8;
  c.max_decode_len = 8;
  c.l2 = 0.0;
  c.lr = 1e-2;
  return c;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("negograph-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace negograph::testing
