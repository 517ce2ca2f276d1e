#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "negograph/corpus.hpp"
#include "negograph/graph.hpp"
#include "negograph/model.hpp"
#include "negograph/tagger.hpp"

namespace negograph {

/// Carries the HTTP status the error maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct ServiceOptions {
  /// Edges kept in the per-message trace snapshot.
  std::size_t snapshot_edges = 200;
};

/// Live buyer-versus-bot negotiations. Every payload carries "v": 1.
/// Sessions are serialized individually; the model is shared read-only.
class NegotiationService {
 public:
  static constexpr int kVersion = 1;

  NegotiationService(std::shared_ptr<const NegotiationModel> model, KeywordTagger tagger,
                     ServiceOptions options = {});

  /// {"scenario": {"listed_price", "buyer_target_price", "title"?}}. The bot
  /// opens with a greeting.
  nlohmann::json create_session(const nlohmann::json& request);
  /// {"text": "..."}: tags the buyer turn, runs the model and appends the
  /// bot reply.
  nlohmann::json post_message(const std::string& id, const nlohmann::json& request);
  /// {"action": "offer", "amount": x} | {"action": "accept" | "reject" | "quit"}
  nlohmann::json post_action(const std::string& id, const nlohmann::json& request);
  /// Full (untruncated) strategy-graph trace of the whole history.
  nlohmann::json trace(const std::string& id);
  nlohmann::json health() const;

  /// Session strategy graph as maintained incrementally (for checks).
  StrategyGraph strategy_graph(const std::string& id);
  /// Session history in corpus form.
  Dialogue history(const std::string& id);

 private:
  struct Offer {
    double amount = 0.0;
    Speaker proposer = Speaker::buyer;
  };
  struct Session {
    std::mutex mutex;
    std::string id;
    Dialogue dialogue;
    EncodedDialogue encoded;
    StrategyGraph st_graph;
    StrategyGraph da_graph;
    std::optional<Offer> offer;
    std::optional<double> buyer_proposal;
    std::optional<double> seller_proposal;
    bool price_seen = false;
    bool terminal = false;
  };

  std::shared_ptr<Session> find(const std::string& id);
  void append(Session& s, DialogueTurn turn) const;
  nlohmann::json price_state(const Session& s) const;
  nlohmann::json turn_json(const DialogueTurn& t) const;
  AttentionTrace full_trace(const Session& s) const;

  std::shared_ptr<const NegotiationModel> model_;
  KeywordTagger tagger_;
  ServiceOptions options_;
  LabelVocab strategies_;
  LabelVocab acts_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_id_ = 1;
};

/// Serves the service over HTTP:
///   POST /sessions, POST /sessions/{id}/message, POST /sessions/{id}/action,
///   GET /sessions/{id}/trace, GET /healthz
class HttpServer {
 public:
  explicit HttpServer(NegotiationService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace negograph
