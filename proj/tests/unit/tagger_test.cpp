#include <gtest/gtest.h>

#include <sstream>

#include "negograph/cb_import.hpp"
#include "negograph/tagger.hpp"

using namespace negograph;

namespace {

bool tagged(const TagResult& r, const std::string& label) {
  const auto id = default_strategy_vocab().id(label);
  return std::find(r.strategies.begin(), r.strategies.end(), id) != r.strategies.end();
}

std::string act_of(const TagResult& r) { return default_dialogue_act_vocab().label(r.act); }

}  // namespace

TEST(Tagger, GreetingIsPoliteness) {
  const auto t = KeywordTagger::builtin();
  const auto r = t.tag("hi", 40, false);
  EXPECT_TRUE(tagged(r, "politeness_greet"));
  EXPECT_EQ(act_of(r), "intro");
}

TEST(Tagger, DollarAmountIsAProposal) {
  const auto t = KeywordTagger::builtin();
  const auto r = t.tag("would you take $30 for it?", 40, false);
  ASSERT_EQ(r.prices.size(), 1u);
  EXPECT_DOUBLE_EQ(r.prices[0].amount, 30.0);
  EXPECT_DOUBLE_EQ(r.prices[0].amount / 40.0, 0.75);
  EXPECT_TRUE(tagged(r, "propose"));
  EXPECT_EQ(act_of(r), "init-price");
  EXPECT_NE(std::find(r.tokens.begin(), r.tokens.end(), "<price-0.750>"), r.tokens.end());
  // once a price has been seen the same turn is a counter
  EXPECT_EQ(act_of(t.tag("would you take $30 for it?", 40, true)), "counter-price");
}

TEST(Tagger, PhrasesAndQuestions) {
  const auto t = KeywordTagger::builtin();
  const auto r = t.tag("Thank you, is it in good shape?", 40, false);
  EXPECT_TRUE(tagged(r, "politeness_gratitude"));
  EXPECT_TRUE(tagged(r, "pos_sentiment"));
  EXPECT_EQ(act_of(r), "inquiry");
  EXPECT_EQ(act_of(t.tag("the weather", 40, false)), "unknown");
}

TEST(Tagger, StrategiesAreSortedAndUnique) {
  const auto t = KeywordTagger::builtin();
  const auto r = t.tag("hi hello hey my friend , please please", 40, false);
  EXPECT_TRUE(std::is_sorted(r.strategies.begin(), r.strategies.end()));
  EXPECT_EQ(std::adjacent_find(r.strategies.begin(), r.strategies.end()), r.strategies.end());
}

TEST(Tagger, CustomRuleTable) {
  std::stringstream rules("# comment\nword\tst:family\tgrandma\nregex\tda:insist\tnot budging\n");
  const auto t = KeywordTagger::parse(rules, default_strategy_vocab(), default_dialogue_act_vocab());
  EXPECT_EQ(t.rules().size(), 2u);
  const auto r = t.tag("Grandma is not budging", 40, false);
  EXPECT_TRUE(tagged(r, "family"));
  EXPECT_EQ(act_of(r), "insist");
}

TEST(Tagger, MalformedRulesNameTheirLine) {
  std::stringstream bad_kind("word\tst:family\tmom\nglob\tst:family\tx\n");
  try {
    KeywordTagger::parse(bad_kind, default_strategy_vocab(), default_dialogue_act_vocab());
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  std::stringstream two_words("word\tst:family\tmy mom\n");
  EXPECT_THROW(KeywordTagger::parse(two_words, default_strategy_vocab(), default_dialogue_act_vocab()),
               std::invalid_argument);
  std::stringstream unknown("word\tst:bluffing\tx\n");
  EXPECT_THROW(KeywordTagger::parse(unknown, default_strategy_vocab(), default_dialogue_act_vocab()),
               VocabularyError);
}

TEST(Tagger, BuiltinTableParses) {
  std::stringstream in{std::string(KeywordTagger::builtin_rules())};
  const auto t = KeywordTagger::parse(in, default_strategy_vocab(), default_dialogue_act_vocab());
  EXPECT_GT(t.rules().size(), 50u);
}

TEST(CraigslistImport, EventsBecomeTurns) {
  const auto records = nlohmann::json::parse(R"([
    {"uuid": "C_1",
     "scenario": {"kbs": [
        {"personal": {"Role": "buyer", "Target": 90},
         "item": {"Price": 120, "Title": "Road bike", "Description": ["light frame"]}},
        {"personal": {"Role": "seller", "Target": 120},
         "item": {"Price": 120, "Title": "Road bike", "Description": ["light frame"]}}]},
     "events": [
        {"action": "message", "agent": 0, "data": "hi, is this still available?"},
        {"action": "message", "agent": 1, "data": "yes it is"},
        {"action": "message", "agent": 0, "data": "would you take $90?"},
        {"action": "message", "agent": 1, "data": "i can do 105",
         "strategies": ["propose"], "dialogue_act": "counter-price"},
        {"action": "offer", "agent": 0, "data": {"price": 100}},
        {"action": "accept", "agent": 1, "data": null}],
     "outcome": {"reward": 1, "offer": {"price": 100}}},
    {"uuid": "C_2", "scenario": {"kbs": []}, "events": []}
  ])");
  ImportStats stats;
  const Corpus c = import_craigslist(records, KeywordTagger::builtin(), &stats);
  EXPECT_EQ(stats.records, 2u);
  EXPECT_EQ(stats.imported, 1u);
  EXPECT_EQ(stats.skipped, 1u);
  EXPECT_EQ(stats.tagged_turns, 3u);
  ASSERT_EQ(c.dialogues.size(), 1u);
  const auto& d = c.dialogues[0];
  EXPECT_EQ(d.scenario.listed_price, 120.0);
  EXPECT_EQ(d.scenario.buyer_target_price, 90.0);
  ASSERT_EQ(d.turns.size(), 6u);
  EXPECT_EQ(d.turns[0].speaker, Speaker::buyer);
  EXPECT_EQ(d.turns[3].speaker, Speaker::seller);
  EXPECT_EQ(c.dialogue_acts.label(d.turns[3].dialogue_act), "counter-price");
  EXPECT_EQ(c.dialogue_acts.label(d.turns[4].dialogue_act), "<offer>");
  EXPECT_EQ(c.dialogue_acts.label(d.turns[5].dialogue_act), "<accept>");
  ASSERT_TRUE(d.outcome.sale_price.has_value());
  EXPECT_EQ(*d.outcome.sale_price, 100.0);
  EXPECT_EQ(d.outcome.final_action, FinalAction::accept);
}
