#include "negograph/tagger.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace negograph {

namespace {

constexpr std::string_view kBuiltinRules =
#include "tagger_rules.inc"
    ;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, '\t')) out.push_back(field);
  return out;
}

bool contains_sequence(const std::vector<std::string>& tokens, const std::vector<std::string>& seq) {
  if (seq.empty() || seq.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), seq.begin(), seq.end()) != tokens.end();
}

}  // namespace

KeywordTagger KeywordTagger::parse(std::istream& in, const LabelVocab& strategies, const LabelVocab& acts) {
  KeywordTagger tagger;
  tagger.unknown_act_ = acts.id("unknown");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_tabs(line);
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("tagger rules line " + std::to_string(number) + ": " + why);
    };
    if (fields.size() < 2) fail("expected 'kind<TAB>target[<TAB>pattern]'");

    Rule r;
    const auto& kind = fields[0];
    if (kind == "word") r.kind = Kind::word;
    else if (kind == "phrase") r.kind = Kind::phrase;
    else if (kind == "regex") r.kind = Kind::regex;
    else if (kind == "price") r.kind = Kind::price;
    else if (kind == "first-price") r.kind = Kind::first_price;
    else fail("unknown rule kind '" + kind + "'");

    const auto& target = fields[1];
    if (target.rfind("st:", 0) == 0) {
      r.label = strategies.id(target.substr(3));
    } else if (target.rfind("da:", 0) == 0) {
      r.act = true;
      r.label = acts.id(target.substr(3));
    } else {
      fail("target must start with 'st:' or 'da:'");
    }

    const bool needs_pattern = r.kind == Kind::word || r.kind == Kind::phrase || r.kind == Kind::regex;
    if (needs_pattern) {
      if (fields.size() < 3 || fields[2].empty()) fail("missing pattern");
      r.pattern = fields[2];
      if (r.kind == Kind::phrase) r.phrase = tokenize(r.pattern);
      if (r.kind == Kind::word) {
        const auto toks = tokenize(r.pattern);
        if (toks.size() != 1) fail("word rule '" + r.pattern + "' is not a single token");
        r.pattern = toks[0];
      }
      if (r.kind == Kind::regex) {
        try {
          r.compiled = std::regex(r.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
          fail("bad regex '" + r.pattern + "': " + e.what());
        }
      }
    }
    tagger.rules_.push_back(std::move(r));
  }
  return tagger;
}

KeywordTagger KeywordTagger::load(const std::filesystem::path& path, const LabelVocab& strategies,
                                  const LabelVocab& acts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tagger rules " + path.string());
  return parse(in, strategies, acts);
}

std::string_view KeywordTagger::builtin_rules() { return kBuiltinRules; }

KeywordTagger KeywordTagger::builtin(const LabelVocab& strategies, const LabelVocab& acts) {
  std::istringstream in{std::string(kBuiltinRules)};
  return parse(in, strategies, acts);
}

TagResult KeywordTagger::tag(std::string_view text, double listed, bool price_seen) const {
  TagResult out;
  const auto words = tokenize(text);
  out.tokens = words;
  out.prices = replace_prices(out.tokens, listed);
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  auto hit = [&](const Rule& r) {
    switch (r.kind) {
      case Kind::word: return std::find(words.begin(), words.end(), r.pattern) != words.end();
      case Kind::phrase: return contains_sequence(words, r.phrase);
      case Kind::regex: return std::regex_search(lowered, r.compiled);
      case Kind::price: return !out.prices.empty();
      case Kind::first_price: return !out.prices.empty() && !price_seen;
    }
    return false;
  };

  std::set<LabelId> strategies;
  bool act_found = false;
  out.act = unknown_act_;
  for (const auto& r : rules_) {
    if (r.act) {
      if (!act_found && hit(r)) {
        out.act = r.label;
        act_found = true;
      }
    } else if (hit(r)) {
      strategies.insert(r.label);
    }
  }
  out.strategies.assign(strategies.begin(), strategies.end());
  return out;
}

}  // namespace negograph
