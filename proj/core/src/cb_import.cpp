#include "negograph/cb_import.hpp"

#include <fstream>
#include <optional>

#include "negograph/price.hpp"

namespace negograph {

namespace {

using json = nlohmann::json;

struct Roles {
  int buyer = -1;
  int seller = -1;
  double listed = 0.0;
  double target = 0.0;
  std::string title;
  std::string description;
};

std::optional<Roles> read_roles(const json& record) {
  const auto sc = record.find("scenario");
  if (sc == record.end() || !sc->is_object()) return std::nullopt;
  const auto kbs = sc->find("kbs");
  if (kbs == sc->end() || !kbs->is_array()) return std::nullopt;
  Roles r;
  for (std::size_t i = 0; i < kbs->size(); ++i) {
    const auto& kb = (*kbs)[i];
    const auto role = kb.at("personal").value("Role", std::string());
    if (role == "buyer") {
      r.buyer = static_cast<int>(i);
      r.target = kb.at("personal").at("Target").get<double>();
    } else if (role == "seller") {
      r.seller = static_cast<int>(i);
      const auto& item = kb.at("item");
      r.listed = item.at("Price").get<double>();
      r.title = item.value("Title", std::string());
      if (auto d = item.find("Description"); d != item.end()) {
        if (d->is_array()) {
          for (const auto& line : *d) {
            if (!r.description.empty()) r.description += ' ';
            r.description += line.get<std::string>();
          }
        } else if (d->is_string()) {
          r.description = d->get<std::string>();
        }
      }
    }
  }
  if (r.buyer < 0 || r.seller < 0) return std::nullopt;
  return r;
}

}  // namespace

Corpus import_craigslist(const json& records, const KeywordTagger& tagger, ImportStats* stats,
                         const LabelVocab& strategies, const LabelVocab& dialogue_acts) {
  if (!records.is_array()) throw SchemaError(0, "CraigslistBargain input must be a JSON array");
  ImportStats local;
  Corpus corpus;
  corpus.strategies = strategies;
  corpus.dialogue_acts = dialogue_acts;

  for (std::size_t index = 0; index < records.size(); ++index) {
    const auto& record = records[index];
    ++local.records;
    std::optional<Roles> roles;
    try {
      roles = read_roles(record);
    } catch (const json::exception& e) {
      throw SchemaError(index, std::string("scenario: ") + e.what());
    }
    const auto events = record.find("events");
    if (!roles || events == record.end() || !events->is_array() || events->empty()) {
      ++local.skipped;
      continue;
    }

    json out = {{"id", record.value("uuid", "cb-" + std::to_string(index))},
                {"scenario",
                 {{"listed_price", roles->listed},
                  {"buyer_target_price", roles->target},
                  {"title", roles->title},
                  {"description", roles->description}}}};
    json turns = json::array();
    bool price_seen = false;
    std::optional<double> last_offer;
    std::string final_action = "quit";
    bool accepted = false;

    for (const auto& ev : *events) {
      const auto action = ev.value("action", std::string());
      const int agent = ev.value("agent", -1);
      if (agent != roles->buyer && agent != roles->seller) throw SchemaError(index, "event from unknown agent");
      json turn = {{"speaker", agent == roles->buyer ? "buyer" : "seller"}};
      if (action == "message") {
        const auto text = ev.value("data", std::string());
        turn["text"] = text;
        if (ev.contains("dialogue_act") && ev.contains("strategies")) {
          turn["dialogue_act"] = ev["dialogue_act"];
          turn["strategies"] = ev["strategies"];
          auto tokens = tokenize(text);
          if (!replace_prices(tokens, roles->listed).empty()) price_seen = true;
        } else {
          const auto tags = tagger.tag(text, roles->listed, price_seen);
          if (!tags.prices.empty()) price_seen = true;
          json names = json::array();
          for (auto s : tags.strategies) names.push_back(strategies.label(s));
          turn["dialogue_act"] = dialogue_acts.label(tags.act);
          turn["strategies"] = names;
          ++local.tagged_turns;
        }
      } else if (action == "offer" || action == "accept" || action == "reject" || action == "quit") {
        turn["dialogue_act"] = "<" + action + ">";
        turn["strategies"] = json::array();
        turn["text"] = "";
        if (action == "offer") {
          const auto& data = ev.at("data");
          const double price = data.is_object() ? data.at("price").get<double>() : data.get<double>();
          last_offer = price;
          turn["text"] = format_price(price);
        }
        if (action == "accept") accepted = true;
        final_action = action;
      } else {
        continue;  // typing notifications and the like
      }
      turns.push_back(std::move(turn));
    }
    out["turns"] = std::move(turns);

    std::optional<double> sale;
    if (accepted) {
      sale = last_offer;
      if (auto oc = record.find("outcome"); oc != record.end() && oc->is_object()) {
        if (auto o = oc->find("offer"); o != oc->end() && o->is_object() && o->contains("price") &&
                                        (*o)["price"].is_number()) {
          sale = (*o)["price"].get<double>();
        }
      }
      final_action = "accept";
    }
    out["outcome"] = {{"sale_price", sale ? json(*sale) : json(nullptr)}, {"final_action", final_action}};
    try {
      corpus.dialogues.push_back(parse_dialogue(out, index, strategies, dialogue_acts));
    } catch (const DomainError&) {
      ++local.skipped;
      continue;
    }
    ++local.imported;
  }
  if (stats != nullptr) *stats = local;
  return corpus;
}

Corpus import_craigslist_file(const std::filesystem::path& path, const KeywordTagger& tagger,
                              ImportStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json records;
  try {
    records = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(0, path.string() + ": " + e.what());
  }
  return import_craigslist(records, tagger, stats);
}

}  // namespace negograph
