#include "negograph/service.hpp"

#include <algorithm>
#include <cstdio>

#include "negograph/price.hpp"

namespace negograph {

namespace {

using json = nlohmann::json;

void check_version(const json& request) {
  if (!request.is_object()) throw ServiceError(400, "request body must be a JSON object");
  if (auto v = request.find("v"); v != request.end()) {
    if (!v->is_number_integer() || v->get<int>() != NegotiationService::kVersion) {
      throw ServiceError(400, "unsupported payload version");
    }
  }
}

bool is_action_act(std::string_view label) { return !label.empty() && label.front() == '<'; }

json amount_json(std::optional<double> amount, double listed) {
  if (!amount) return nullptr;
  return {{"amount", *amount}, {"fraction", *amount / listed}};
}

}  // namespace

NegotiationService::NegotiationService(std::shared_ptr<const NegotiationModel> model,
                                       KeywordTagger tagger, ServiceOptions options)
    : model_(std::move(model)), tagger_(std::move(tagger)), options_(options) {
  if (model_) {
    strategies_ = model_->strategies();
    acts_ = model_->dialogue_acts();
  } else {
    strategies_ = default_strategy_vocab();
    acts_ = default_dialogue_act_vocab();
  }
}

std::shared_ptr<NegotiationService::Session> NegotiationService::find(const std::string& id) {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  return it->second;
}

json NegotiationService::turn_json(const DialogueTurn& t) const {
  json st = json::array();
  for (auto s : t.strategies) st.push_back(strategies_.label(s));
  return {{"speaker", to_string(t.speaker)},
          {"text", t.text},
          {"strategies", st},
          {"dialogue_act", acts_.label(t.dialogue_act)}};
}

json NegotiationService::price_state(const Session& s) const {
  const double listed = s.dialogue.scenario.listed_price;
  json offer = nullptr;
  if (s.offer) {
    offer = amount_json(s.offer->amount, listed);
    offer["proposer"] = to_string(s.offer->proposer);
  }
  return {{"listed_price", listed},
          {"buyer_target_price", s.dialogue.scenario.buyer_target_price},
          {"buyer_proposal", amount_json(s.buyer_proposal, listed)},
          {"seller_proposal", amount_json(s.seller_proposal, listed)},
          {"outstanding_offer", offer}};
}

void NegotiationService::append(Session& s, DialogueTurn turn) const {
  if (s.dialogue.turns.empty() && turn.strategies.empty() && strategies_.contains("<start>")) {
    turn.strategies.push_back(strategies_.id("<start>"));
  }
  EncodedTurn e;
  e.speaker = turn.speaker;
  e.strategies = turn.strategies;
  e.act = turn.dialogue_act;
  for (const auto& tok : turn.tokens) e.tokens.push_back(model_->tokens().id(tok));
  s.st_graph.extend(turn.strategies);
  s.da_graph.extend(std::span<const LabelId>(&turn.dialogue_act, 1));
  s.encoded.turns.push_back(std::move(e));
  s.dialogue.turns.push_back(std::move(turn));
}

AttentionTrace NegotiationService::full_trace(const Session& s) const {
  AttentionTrace trace;
  trace.nodes = s.st_graph.nodes();
  if (model_->config().variant != Variant::graph || s.encoded.turns.empty()) return trace;
  nd::Tape tape;
  auto pass = model_->forward(tape, s.encoded, s.encoded.turns.size(), false, nullptr, true);
  if (!pass.strategy_traces.empty() && !pass.strategy_traces.back().layers.empty()) {
    trace = std::move(pass.strategy_traces.back());
  }
  return trace;
}

json NegotiationService::create_session(const json& request) {
  check_version(request);
  if (!model_) throw ServiceError(503, "no model loaded");
  const auto sc = request.find("scenario");
  if (sc == request.end() || !sc->is_object()) throw ServiceError(400, "missing 'scenario' object");

  auto session = std::make_shared<Session>();
  auto& scenario = session->dialogue.scenario;
  try {
    scenario.listed_price = sc->at("listed_price").get<double>();
    scenario.buyer_target_price = sc->at("buyer_target_price").get<double>();
    scenario.title = sc->value("title", std::string("the item"));
    scenario.description = sc->value("description", std::string());
  } catch (const json::exception& e) {
    throw ServiceError(400, std::string("bad scenario: ") + e.what());
  }
  try {
    scenario.validate();
  } catch (const DomainError& e) {
    throw ServiceError(400, e.what());
  }
  session->st_graph = StrategyGraph(strategies_.size());
  session->da_graph = StrategyGraph(acts_.size());
  session->encoded.listed_price = scenario.listed_price;

  {
    std::unique_lock lock(sessions_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "s%06zu", next_id_++);
    session->id = buf;
    session->dialogue.id = buf;
    session->encoded.id = buf;
    sessions_.emplace(session->id, session);
  }

  const std::string greeting = "hi , are you interested in the " + scenario.title + " ?";
  const auto tags = tagger_.tag(greeting, scenario.listed_price, false);
  DialogueTurn opening;
  opening.speaker = Speaker::seller;
  opening.text = greeting;
  opening.tokens = tags.tokens;
  opening.strategies = tags.strategies;
  opening.dialogue_act = tags.act;
  std::lock_guard guard(session->mutex);
  append(*session, std::move(opening));

  return {{"v", kVersion},
          {"session", session->id},
          {"scenario",
           {{"listed_price", scenario.listed_price},
            {"buyer_target_price", scenario.buyer_target_price},
            {"title", scenario.title}}},
          {"opening", turn_json(session->dialogue.turns.front())},
          {"price_state", price_state(*session)}};
}

json NegotiationService::post_message(const std::string& id, const json& request) {
  check_version(request);
  auto session = find(id);
  std::lock_guard guard(session->mutex);
  auto& s = *session;
  if (s.terminal) throw ServiceError(409, "session " + id + " has ended");
  const auto text = request.find("text");
  if (text == request.end() || !text->is_string()) throw ServiceError(400, "missing 'text' string");
  const double listed = s.dialogue.scenario.listed_price;

  // buyer turn
  const auto tags = tagger_.tag(text->get<std::string>(), listed, s.price_seen);
  DialogueTurn buyer;
  buyer.speaker = Speaker::buyer;
  buyer.text = text->get<std::string>();
  buyer.tokens = tags.tokens;
  buyer.strategies = tags.strategies;
  buyer.dialogue_act = tags.act;
  buyer.raw_prices = tags.prices;
  if (!tags.prices.empty()) {
    s.price_seen = true;
    s.buyer_proposal = tags.prices.back().amount;
  }
  append(s, buyer);

  // bot reply from the prefix ending at the buyer turn
  const auto& model = *model_;
  DialogueTurn reply;
  reply.speaker = Speaker::seller;
  {
    nd::Tape tape;
    auto pass = model.forward(tape, s.encoded, s.encoded.turns.size(), false);
    const auto& step = pass.steps.back();
    const auto prediction = predict_strategies(step.strategy_logits.value().values());
    for (std::size_t j = 0; j < prediction.khot.size(); ++j)
      if (prediction.khot[j]) reply.strategies.push_back(static_cast<LabelId>(j));
    // The bot never takes deal actions on its own.
    const auto& logits = step.act_logits.value().values();
    std::size_t best = acts_.size();
    for (std::size_t a = 0; a < acts_.size(); ++a) {
      if (is_action_act(acts_.label(a))) continue;
      if (best == acts_.size() || logits[a] > logits[best]) best = a;
    }
    reply.dialogue_act = static_cast<LabelId>(best);
    auto ids = model.greedy_decode(step.h.value(), model.config().max_decode_len);
    if (!ids.empty() && ids.back() == TokenVocab::kEos) ids.pop_back();
    reply.text = model.realize(ids, listed);
    for (auto i : ids) {
      const auto& tok = model.tokens().token(i);
      if (auto f = parse_placeholder(tok)) {
        const double amount = *f * listed;
        reply.raw_prices.push_back({reply.tokens.size(), amount});
        s.seller_proposal = amount;
        s.price_seen = true;
      }
      reply.tokens.push_back(tok);
    }
  }
  append(s, reply);

  // what the buyer is expected to do next, plus the trace of the whole history
  json next = json::array();
  AttentionTrace trace;
  trace.nodes = s.st_graph.nodes();
  {
    nd::Tape tape;
    const bool traces = model.config().variant == Variant::graph;
    auto pass = model.forward(tape, s.encoded, s.encoded.turns.size(), false, nullptr, traces);
    const auto prediction = predict_strategies(pass.steps.back().strategy_logits.value().values());
    for (std::size_t j = 0; j < prediction.khot.size(); ++j)
      if (prediction.khot[j]) next.push_back(strategies_.label(static_cast<LabelId>(j)));
    if (traces && !pass.strategy_traces.back().layers.empty()) trace = std::move(pass.strategy_traces.back());
  }

  const auto bot = turn_json(s.dialogue.turns.back());
  return {{"v", kVersion},
          {"session", s.id},
          {"turn", s.dialogue.turns.size() - 1},
          {"buyer", turn_json(s.dialogue.turns[s.dialogue.turns.size() - 2])},
          {"bot_reply", bot["text"]},
          {"bot_strategies", bot["strategies"]},
          {"bot_da", bot["dialogue_act"]},
          {"predicted_next_strategies", next},
          {"price_state", price_state(s)},
          {"trace_snapshot", trace_to_json(truncate_trace(trace, options_.snapshot_edges), &strategies_)}};
}

json NegotiationService::post_action(const std::string& id, const json& request) {
  check_version(request);
  auto session = find(id);
  std::lock_guard guard(session->mutex);
  auto& s = *session;
  if (s.terminal) throw ServiceError(409, "session " + id + " has ended");
  const auto action_it = request.find("action");
  if (action_it == request.end() || !action_it->is_string()) throw ServiceError(400, "missing 'action' string");
  FinalAction action;
  try {
    action = parse_final_action(action_it->get<std::string>());
  } catch (const std::exception&) {
    throw ServiceError(400, "unknown action '" + action_it->get<std::string>() + "'");
  }
  const auto& scenario = s.dialogue.scenario;

  DialogueTurn turn;
  turn.speaker = Speaker::buyer;
  turn.dialogue_act = acts_.id("<" + std::string(to_string(action)) + ">");
  json outcome = nullptr;
  switch (action) {
    case FinalAction::offer: {
      const auto amount = request.find("amount");
      if (amount == request.end() || !amount->is_number() || !(amount->get<double>() > 0.0)) {
        throw ServiceError(400, "offer needs a positive 'amount'");
      }
      const double a = amount->get<double>();
      s.offer = Offer{a, Speaker::buyer};
      s.buyer_proposal = a;
      s.price_seen = true;
      turn.text = format_price(a);
      turn.tokens = {price_to_placeholder(a, scenario.listed_price)};
      turn.raw_prices = {{0, a}};
      break;
    }
    case FinalAction::accept:
    case FinalAction::reject:
      if (!s.offer) throw ServiceError(409, "no outstanding offer to " + std::string(to_string(action)));
      turn.speaker = s.offer->proposer == Speaker::buyer ? Speaker::seller : Speaker::buyer;
      [[fallthrough]];
    case FinalAction::quit: {
      s.terminal = true;
      s.dialogue.outcome.final_action = action;
      if (action == FinalAction::accept) s.dialogue.outcome.sale_price = s.offer->amount;
      const auto& sale = s.dialogue.outcome.sale_price;
      outcome = {{"final_action", to_string(action)},
                 {"sale_price", sale ? json(*sale) : json(nullptr)},
                 {"ratio", sale ? json(compute_ratio(*sale, scenario.buyer_target_price, scenario.listed_price))
                                : json(nullptr)}};
      break;
    }
  }
  append(s, std::move(turn));
  return {{"v", kVersion},
          {"session", s.id},
          {"action", to_string(action)},
          {"terminal", s.terminal},
          {"outcome", outcome},
          {"price_state", price_state(s)}};
}

json NegotiationService::trace(const std::string& id) {
  auto session = find(id);
  std::lock_guard guard(session->mutex);
  return {{"v", kVersion}, {"session", id}, {"trace", trace_to_json(full_trace(*session), &strategies_)}};
}

json NegotiationService::health() const {
  std::shared_lock lock(sessions_mutex_);
  return {{"v", kVersion}, {"status", "ok"}, {"model_loaded", model_ != nullptr}, {"sessions", sessions_.size()}};
}

StrategyGraph NegotiationService::strategy_graph(const std::string& id) {
  auto session = find(id);
  std::lock_guard guard(session->mutex);
  return session->st_graph;
}

Dialogue NegotiationService::history(const std::string& id) {
  auto session = find(id);
  std::lock_guard guard(session->mutex);
  return session->dialogue;
}

}  // namespace negograph
