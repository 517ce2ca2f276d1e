#include "negograph/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "negograph/price.hpp"

namespace negograph {

using nlohmann::json;

std::string_view to_string(Speaker s) { return s == Speaker::buyer ? "buyer" : "seller"; }

std::string_view to_string(FinalAction a) {
  switch (a) {
    case FinalAction::offer: return "offer";
    case FinalAction::accept: return "accept";
    case FinalAction::reject: return "reject";
    case FinalAction::quit: return "quit";
  }
  return "quit";
}

Speaker parse_speaker(std::string_view s) {
  if (s == "buyer") return Speaker::buyer;
  if (s == "seller") return Speaker::seller;
  throw std::invalid_argument("unknown speaker '" + std::string(s) + "'");
}

FinalAction parse_final_action(std::string_view s) {
  if (s == "offer") return FinalAction::offer;
  if (s == "accept") return FinalAction::accept;
  if (s == "reject") return FinalAction::reject;
  if (s == "quit") return FinalAction::quit;
  throw std::invalid_argument("unknown final action '" + std::string(s) + "'");
}

void Scenario::validate() const {
  if (!(listed_price > 0.0)) throw DomainError("scenario: listed price must be positive");
  if (listed_price == buyer_target_price) {
    throw DomainError("scenario: listed price equals buyer target (ratio undefined)");
  }
}

std::optional<double> Dialogue::ratio() const {
  if (!outcome.sale_price) return std::nullopt;
  return compute_ratio(*outcome.sale_price, scenario.buyer_target_price, scenario.listed_price);
}

std::size_t Corpus::turn_count() const {
  std::size_t n = 0;
  for (const auto& d : dialogues) n += d.turns.size();
  return n;
}

// ---- tokenization ---------------------------------------------------------

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\'' || c == '_';
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    // keep placeholders intact
    if (c == '<') {
      const auto close = text.find('>', i);
      if (close != std::string_view::npos && close - i < 32) {
        out.emplace_back(text.substr(i, close - i + 1));
        i = close + 1;
        continue;
      }
    }
    if (c == '$' || is_digit(c)) {
      std::size_t j = i + (c == '$' ? 1 : 0);
      std::size_t start_digits = j;
      while (j < text.size() && (is_digit(text[j]) || text[j] == ',' ||
                                 (text[j] == '.' && j + 1 < text.size() && is_digit(text[j + 1])))) {
        ++j;
      }
      if (j > start_digits) {
        std::string tok(text.substr(i, j - i));
        tok.erase(std::remove(tok.begin(), tok.end(), ','), tok.end());
        out.push_back(std::move(tok));
        i = j;
        continue;
      }
      if (c == '$') {
        out.emplace_back("$");
        ++i;
        continue;
      }
    }
    if (is_word(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word(text[j])) ++j;
      std::string tok(text.substr(i, j - i));
      for (char& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      out.push_back(std::move(tok));
      i = j;
      continue;
    }
    out.emplace_back(1, c);
    ++i;
  }
  return out;
}

namespace {

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::vector<PriceMention> replace_prices(std::vector<std::string>& tokens, double listed) {
  std::vector<PriceMention> mentions;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string& tok = tokens[i];
    if (auto f = parse_placeholder(tok)) {
      mentions.push_back({i, *f * listed});
      continue;
    }
    bool dollar = false;
    std::string_view body = tok;
    if (!body.empty() && body.front() == '$') {
      dollar = true;
      body.remove_prefix(1);
    }
    // "$" "35" split by upstream tokenizers
    if (!dollar && i > 0 && tokens[i - 1] == "$") dollar = true;
    const auto value = parse_number(body);
    if (!value) continue;
    const double frac = *value / listed;
    if (!dollar && (frac < 0.3 || frac > 2.0)) continue;
    mentions.push_back({i, *value});
    tok = price_to_placeholder(*value, listed);
  }
  // drop orphaned "$" tokens that preceded a replaced number
  std::vector<std::string> kept;
  std::vector<PriceMention> shifted;
  std::size_t m = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool next_is_price = i + 1 < tokens.size() && is_placeholder(tokens[i + 1]);
    if (tokens[i] == "$" && next_is_price) continue;
    if (m < mentions.size() && mentions[m].position == i) {
      shifted.push_back({kept.size(), mentions[m].amount});
      ++m;
    }
    kept.push_back(std::move(tokens[i]));
  }
  tokens = std::move(kept);
  return shifted;
}

// ---- JSON records ---------------------------------------------------------

namespace {

const json& field(const json& obj, const char* name, std::size_t index) {
  auto it = obj.find(name);
  if (it == obj.end()) throw SchemaError(index, std::string("missing field '") + name + "'");
  return *it;
}

double number_field(const json& obj, const char* name, std::size_t index) {
  const json& v = field(obj, name, index);
  if (!v.is_number()) throw SchemaError(index, std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

std::string string_field(const json& obj, const char* name, std::size_t index) {
  const json& v = field(obj, name, index);
  if (!v.is_string()) throw SchemaError(index, std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

Dialogue parse_dialogue(const json& record, std::size_t index, const LabelVocab& strategies,
                        const LabelVocab& dialogue_acts) {
  if (!record.is_object()) throw SchemaError(index, "record must be a JSON object");
  Dialogue d;
  d.id = record.contains("id") && record["id"].is_string() ? record["id"].get<std::string>()
                                                           : std::to_string(index);

  const json& sc = field(record, "scenario", index);
  if (!sc.is_object()) throw SchemaError(index, "'scenario' must be an object");
  d.scenario.listed_price = number_field(sc, "listed_price", index);
  d.scenario.buyer_target_price = number_field(sc, "buyer_target_price", index);
  d.scenario.title = string_field(sc, "title", index);
  if (auto it = sc.find("description"); it != sc.end() && it->is_string()) {
    d.scenario.description = it->get<std::string>();
  }
  try {
    d.scenario.validate();
  } catch (const DomainError& e) {
    throw SchemaError(index, e.what());
  }

  const json& turns = field(record, "turns", index);
  if (!turns.is_array()) throw SchemaError(index, "'turns' must be an array");
  for (const json& jt : turns) {
    if (!jt.is_object()) throw SchemaError(index, "turn must be an object");
    DialogueTurn t;
    try {
      t.speaker = parse_speaker(string_field(jt, "speaker", index));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(index, e.what());
    }
    if (auto it = jt.find("text"); it != jt.end() && it->is_string()) t.text = it->get<std::string>();
    if (auto it = jt.find("tokens"); it != jt.end()) {
      if (!it->is_array()) throw SchemaError(index, "'tokens' must be an array");
      for (const json& tok : *it) {
        if (!tok.is_string()) throw SchemaError(index, "token must be a string");
        t.tokens.push_back(tok.get<std::string>());
      }
    } else {
      t.tokens = tokenize(t.text);
    }
    t.raw_prices = replace_prices(t.tokens, d.scenario.listed_price);
    t.dialogue_act = dialogue_acts.id(string_field(jt, "dialogue_act", index));
    const json& st = field(jt, "strategies", index);
    if (!st.is_array()) throw SchemaError(index, "'strategies' must be an array");
    for (const json& s : st) {
      if (!s.is_string()) throw SchemaError(index, "strategy must be a string");
      t.strategies.push_back(strategies.id(s.get<std::string>()));
    }
    std::sort(t.strategies.begin(), t.strategies.end());
    t.strategies.erase(std::unique(t.strategies.begin(), t.strategies.end()), t.strategies.end());
    d.turns.push_back(std::move(t));
  }
  if (!d.turns.empty() && d.turns.front().strategies.empty() && strategies.contains("<start>")) {
    d.turns.front().strategies.push_back(strategies.id("<start>"));
  }

  const json& oc = field(record, "outcome", index);
  if (!oc.is_object()) throw SchemaError(index, "'outcome' must be an object");
  const json& sale = field(oc, "sale_price", index);
  if (sale.is_number()) {
    d.outcome.sale_price = sale.get<double>();
  } else if (!sale.is_null()) {
    throw SchemaError(index, "'sale_price' must be a number or null");
  }
  try {
    d.outcome.final_action = parse_final_action(string_field(oc, "final_action", index));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(index, e.what());
  }
  return d;
}

json dialogue_to_json(const Dialogue& d, const LabelVocab& strategies,
                      const LabelVocab& dialogue_acts) {
  json turns = json::array();
  for (const auto& t : d.turns) {
    json st = json::array();
    for (LabelId s : t.strategies) st.push_back(strategies.label(s));
    turns.push_back({{"speaker", to_string(t.speaker)},
                     {"text", t.text},
                     {"tokens", t.tokens},
                     {"dialogue_act", dialogue_acts.label(t.dialogue_act)},
                     {"strategies", std::move(st)}});
  }
  json scenario = {{"listed_price", d.scenario.listed_price},
                   {"buyer_target_price", d.scenario.buyer_target_price},
                   {"title", d.scenario.title}};
  if (!d.scenario.description.empty()) scenario["description"] = d.scenario.description;
  json outcome = {{"sale_price", d.outcome.sale_price ? json(*d.outcome.sale_price) : json(nullptr)},
                  {"final_action", to_string(d.outcome.final_action)}};
  return {{"id", d.id}, {"scenario", std::move(scenario)}, {"turns", std::move(turns)},
          {"outcome", std::move(outcome)}};
}

Corpus read_corpus(std::istream& in, const LoadOptions& options) {
  Corpus corpus;
  corpus.strategies = options.strategies;
  corpus.dialogue_acts = options.dialogue_acts;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    const bool blank = std::all_of(line.begin(), line.end(),
                                   [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (blank) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(index, std::string("invalid JSON: ") + e.what());
    }
    Dialogue d = parse_dialogue(record, index, corpus.strategies, corpus.dialogue_acts);
    if (d.turns.size() >= options.min_turns) corpus.dialogues.push_back(std::move(d));
    ++index;
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus " + path.string());
  return read_corpus(in, options);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& d : corpus.dialogues) {
    out << dialogue_to_json(d, corpus.strategies, corpus.dialogue_acts).dump() << '\n';
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus " + path.string());
  write_corpus(corpus, out);
}

}  // namespace negograph
