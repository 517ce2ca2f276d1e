#include "commands.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "negograph/cb_import.hpp"
#include "negograph/checkpoint.hpp"
#include "negograph/interpret.hpp"
#include "negograph/pipeline.hpp"
#include "negograph/service.hpp"
#include "negograph/synth.hpp"

namespace negograph::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

/// `name` inside a directory, or the path itself for a file.
fs::path split_file(const fs::path& corpus, const char* name) {
  return fs::is_directory(corpus) ? corpus / name : corpus;
}

std::vector<std::size_t> parse_labels(const std::string& list, const LabelVocab& vocab) {
  std::vector<std::size_t> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(vocab.id(item));
  return out;
}

KeywordTagger tagger_for(const fs::path& rules, const NegotiationModel& model) {
  if (rules.empty()) return KeywordTagger::builtin(model.strategies(), model.dialogue_acts());
  return KeywordTagger::load(rules, model.strategies(), model.dialogue_acts());
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int run_train(const TrainArgs& args) {
  Config config = args.config.empty() ? Config{} : Config::load(args.config);
  if (args.seed) config.seed = *args.seed;
  if (args.variant) config.variant = parse_variant(*args.variant);
  if (args.epochs) config.max_epochs = *args.epochs;
  config.validate();
  const auto hash = config.hash_hex();

  LoadOptions lo;
  lo.min_turns = config.min_turns;
  Corpus train = load_corpus(split_file(args.corpus, "train.jsonl"), lo);
  Corpus valid;
  if (!args.valid.empty()) {
    valid = load_corpus(args.valid, lo);
  } else if (fs::is_directory(args.corpus) && fs::exists(args.corpus / "valid.jsonl")) {
    valid = load_corpus(args.corpus / "valid.jsonl", lo);
  } else {
    // deterministic holdout: the last tenth of the file
    const std::size_t n = train.dialogues.size();
    const std::size_t hold = std::max<std::size_t>(1, n / 10);
    if (n < 2) throw std::runtime_error("training corpus needs at least two dialogues for a holdout");
    valid.dialogues.assign(train.dialogues.end() - static_cast<std::ptrdiff_t>(hold), train.dialogues.end());
    train.dialogues.resize(n - hold);
  }
  if (train.dialogues.empty()) throw std::runtime_error("no training dialogues with at least " +
                                                        std::to_string(config.min_turns) + " turns");
  spdlog::info("config {}: {} train / {} valid dialogues, variant {}", hash, train.dialogues.size(),
               valid.dialogues.size(), to_string(config.variant));

  ensure_dir(args.out);
  auto model = make_model(config, train);
  const auto tr = encode_for(*model, train);
  const auto va = encode_for(*model, valid);
  const auto weights = class_weights_for(*model, tr);

  FitOptions fo;
  fo.log_csv = args.out / "train_log.csv";
  fo.on_epoch = [&](const EpochLog& e) {
    spdlog::info("[{}] epoch {} loss {:.4f} valid strategy macro-F1 {:.4f}{}", hash, e.epoch, e.joint,
                 e.valid_strategy_macro_f1, e.improved ? " *" : "");
  };
  auto result = fit(*model, tr, va, weights, fo);
  save_checkpoint(args.out / "checkpoint.bin", *model, weights, &result.optimizer);

  json cfg = config.to_json();
  write_json(args.out / "config.json", {{"config_hash", hash}, {"config", cfg}});
  write_json(args.out / "summary.json", {{"v", 1},
                                         {"config_hash", hash},
                                         {"epochs", result.log.size()},
                                         {"best_epoch", result.best_epoch},
                                         {"best_valid_strategy_macro_f1", result.best_valid},
                                         {"stopped_early", result.stopped_early},
                                         {"train_dialogues", train.dialogues.size()},
                                         {"valid_dialogues", valid.dialogues.size()}});
  spdlog::info("[{}] best epoch {} (valid macro-F1 {:.4f}); wrote {}", hash, result.best_epoch, result.best_valid,
               (args.out / "checkpoint.bin").string());
  return 0;
}

int run_eval(const EvalArgs& args) {
  ensure_dir(args.out);
  if (!args.predictions.empty()) {
    std::ifstream in(args.predictions);
    if (!in) throw std::runtime_error("cannot open " + args.predictions.string());
    const auto st = default_strategy_vocab();
    std::string hash;
    const auto metrics = score_predictions(in, st, default_dialogue_act_vocab(), parse_labels(args.labels, st), &hash);
    write_json(args.out / "metrics.json", {{"v", 1},
                                           {"config_hash", hash.empty() ? json(nullptr) : json(hash)},
                                           {"source", args.predictions.string()},
                                           {"metrics", metrics_to_json(metrics)}});
    spdlog::info("scored {} predictions from {}", metrics.instances, args.predictions.string());
    return 0;
  }

  auto loaded = load_checkpoint(args.checkpoint);
  const auto& model = *loaded.model;
  const auto hash = model.config().hash_hex();
  fs::path split = split_file(args.corpus, "test.jsonl");
  if (fs::is_directory(args.corpus) && !fs::exists(split)) split = args.corpus / "valid.jsonl";
  LoadOptions lo;
  lo.min_turns = model.config().min_turns;
  lo.strategies = model.strategies();
  lo.dialogue_acts = model.dialogue_acts();
  const auto corpus = load_corpus(split, lo);
  const auto data = encode_for(model, corpus);

  std::ofstream predictions(args.out / "predictions.jsonl", std::ios::binary);
  std::vector<AttentionTrace> traces;
  EvalOptions eo;
  eo.generate = args.generate;
  eo.strategy_labels = parse_labels(args.labels, model.strategies());
  eo.predictions = &predictions;
  eo.config_hash = hash;
  const bool want_traces = args.traces && model.config().variant == Variant::graph;
  if (want_traces) eo.traces = &traces;
  const auto metrics = evaluate(model, data, eo);

  write_json(args.out / "metrics.json", {{"v", 1},
                                         {"config_hash", hash},
                                         {"split", split.string()},
                                         {"dialogues", data.size()},
                                         {"metrics", metrics_to_json(metrics)}});
  if (want_traces) {
    std::ofstream out(args.out / "traces.jsonl", std::ios::binary);
    std::size_t k = 0;
    for (const auto& d : data) {
      if (d.turns.size() < 2) continue;
      out << json{{"dialogue", d.id}, {"config_hash", hash}, {"trace", trace_to_json(traces.at(k++), &model.strategies())}}
                 .dump()
          << '\n';
    }
  }
  spdlog::info("[{}] {} instances, strategy micro-F1 {:.4f}, macro-F1 {:.4f}", hash, metrics.instances,
               metrics.strategy_f1.micro, metrics.strategy_f1.macro);
  return 0;
}

int run_explain(const ExplainArgs& args) {
  LabelVocab strategies = default_strategy_vocab();
  if (!args.checkpoint.empty()) strategies = load_checkpoint(args.checkpoint).model->strategies();
  std::ifstream in(args.traces);
  if (!in) throw std::runtime_error("cannot open " + args.traces.string());

  std::vector<std::string> ids;
  std::vector<AttentionTrace> traces;
  std::string hash;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      if (hash.empty() && j.contains("config_hash")) hash = j["config_hash"].get<std::string>();
      ids.push_back(j.value("dialogue", "trace-" + std::to_string(number)));
      traces.push_back(trace_from_json(j.at("trace"), &strategies));
    } catch (const json::exception& e) {
      throw SchemaError(number, e.what());
    }
  }
  if (traces.empty()) throw std::runtime_error(args.traces.string() + " holds no traces");
  ensure_dir(args.out);

  json influence = json::array();
  for (std::size_t k = 0; k < traces.size(); ++k) {
    json maps = json::array();
    if (!traces[k].layers.empty()) {
      for (std::size_t n = 0; n < traces[k].layers.front().node_count; ++n)
        maps.push_back(influence_to_json(influence_map(traces[k], n), traces[k], &strategies));
    }
    influence.push_back({{"dialogue", ids[k]}, {"maps", maps}});
  }
  const json hash_json = hash.empty() ? json(nullptr) : json(hash);
  write_json(args.out / "influence.json", {{"v", 1}, {"config_hash", hash_json}, {"dialogues", influence}});

  const auto table = association_scores(traces, strategies);
  write_text(args.out / "associations.csv",
             "# config_hash " + (hash.empty() ? std::string("unknown") : hash) + "\n" +
                 association_csv(table, strategies));

  auto report = boundary_to_json(propose_boundary_report(traces, strategies.id("propose")));
  report["v"] = 1;
  report["config_hash"] = hash_json;
  write_json(args.out / "propose_report.json", report);

  if (args.dot) {
    ensure_dir(args.out / "dot");
    for (std::size_t k = 0; k < traces.size(); ++k)
      write_text(args.out / "dot" / (ids[k] + ".dot"), trace_to_dot(traces[k], &strategies));
  }
  spdlog::info("explained {} traces into {}", traces.size(), args.out.string());
  return 0;
}

int run_synth(const SynthArgs& args) {
  const auto strategies = default_strategy_vocab();
  SynthOptions so;
  so.rules = args.rules.empty() ? default_rules(strategies) : parse_rules(args.rules, strategies);
  so.dialogues = args.dialogues;
  so.turns = args.turns;
  so.noise_rate = args.noise;
  so.trigger_rate = args.trigger_rate;
  so.seed = args.seed;
  if (args.valid_fraction + args.test_fraction >= 1.0) throw std::invalid_argument("split fractions leave no training data");

  json rules = json::array();
  for (const auto& r : so.rules)
    rules.push_back({{"trigger", strategies.label(r.trigger)},
                     {"consequence", strategies.label(r.consequence)},
                     {"lag", r.lag},
                     {"probability", r.probability}});
  json settings = {{"dialogues", so.dialogues}, {"turns", so.turns},   {"noise_rate", so.noise_rate},
                   {"trigger_rate", so.trigger_rate}, {"seed", so.seed}, {"rules", rules},
                   {"valid_fraction", args.valid_fraction}, {"test_fraction", args.test_fraction}};
  const auto hash = to_hex(fnv1a64(settings.dump()));

  const auto corpus = generate(so, strategies);
  const std::size_t n = corpus.dialogues.size();
  const auto n_valid = static_cast<std::size_t>(static_cast<double>(n) * args.valid_fraction);
  const auto n_test = static_cast<std::size_t>(static_cast<double>(n) * args.test_fraction);
  const std::size_t n_train = n - n_valid - n_test;

  ensure_dir(args.out);
  auto dump = [&](const char* name, std::size_t begin, std::size_t end) {
    Corpus part;
    part.dialogues.assign(corpus.dialogues.begin() + static_cast<std::ptrdiff_t>(begin),
                          corpus.dialogues.begin() + static_cast<std::ptrdiff_t>(end));
    save_corpus(part, args.out / name);
  };
  dump("train.jsonl", 0, n_train);
  dump("valid.jsonl", n_train, n_train + n_valid);
  dump("test.jsonl", n_train + n_valid, n);
  write_json(args.out / "synth.json", {{"v", 1}, {"config_hash", hash}, {"settings", settings}});
  spdlog::info("[{}] wrote {} / {} / {} dialogues to {}", hash, n_train, n_valid, n_test, args.out.string());
  return 0;
}

int run_serve(const ServeArgs& args) {
  auto loaded = load_checkpoint(args.checkpoint);
  std::shared_ptr<const NegotiationModel> model(std::move(loaded.model));
  NegotiationService service(model, tagger_for(args.tagger_rules, *model));
  HttpServer server(service);
  const int port = server.bind(args.host, args.port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("[{}] serving on http://{}:{}", model->config().hash_hex(), args.host, port);
  std::cout << "listening " << port << std::endl;
  server.listen();
  g_server = nullptr;
  return 0;
}

int run_chat(const ChatArgs& args) {
  auto loaded = load_checkpoint(args.checkpoint);
  std::shared_ptr<const NegotiationModel> model(std::move(loaded.model));
  NegotiationService service(model, tagger_for(args.tagger_rules, *model));
  const auto created = service.create_session(
      {{"scenario", {{"listed_price", args.listed}, {"buyer_target_price", args.target}, {"title", args.title}}}});
  const std::string id = created["session"];
  std::cout << "[config " << model->config().hash_hex() << "] /offer <amount>, /accept, /reject, /quit\n";
  std::cout << "bot: " << created["opening"]["text"].get<std::string>() << "\n";

  std::string line;
  while (std::cout << "you: " << std::flush, std::getline(std::cin, line)) {
    if (line.empty()) continue;
    try {
      if (line[0] == '/') {
        std::istringstream in(line.substr(1));
        std::string action;
        in >> action;
        json req = {{"action", action}};
        if (action == "offer") {
          double amount = 0.0;
          if (!(in >> amount)) {
            std::cout << "usage: /offer <amount>\n";
            continue;
          }
          req["amount"] = amount;
        }
        const auto res = service.post_action(id, req);
        if (res["terminal"].get<bool>()) {
          std::cout << "deal over: " << res["outcome"].dump() << "\n";
          return 0;
        }
        std::cout << "offer on the table: " << res["price_state"]["outstanding_offer"].dump() << "\n";
      } else {
        const auto res = service.post_message(id, {{"text", line}});
        std::cout << "bot: " << res["bot_reply"].get<std::string>() << "   " << res["bot_strategies"].dump() << " "
                  << res["bot_da"].get<std::string>() << "\n";
      }
    } catch (const ServiceError& e) {
      std::cout << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

int run_import(const ImportArgs& args) {
  ImportStats stats;
  auto corpus = import_craigslist_file(args.input, KeywordTagger::builtin(), &stats);
  const std::size_t before = corpus.dialogues.size();
  std::erase_if(corpus.dialogues, [&](const Dialogue& d) { return d.turns.size() < args.min_turns; });
  save_corpus(corpus, args.out);
  spdlog::info("imported {} of {} records ({} skipped, {} shorter than {} turns, {} turns tagged)", corpus.dialogues.size(),
               stats.records, stats.skipped, before - corpus.dialogues.size(), args.min_turns, stats.tagged_turns);
  return 0;
}

}  // namespace negograph::cli
