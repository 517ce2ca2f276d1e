#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "commands.hpp"

using namespace negograph::cli;

int main(int argc, char** argv) {
  CLI::App app{"negograph: negotiation strategy graphs, training and live service"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a model and write checkpoint + log");
  t->add_option("--corpus", train.corpus, "corpus file or directory with train.jsonl [valid.jsonl]")
      ->required();
  t->add_option("--valid", train.valid, "validation corpus (default: valid.jsonl or a 10% holdout)");
  t->add_option("--config", train.config, "JSON config file");
  t->add_option("--out", train.out, "output directory")->required();
  t->add_option("--seed", train.seed, "override the config seed");
  t->add_option("--variant", train.variant, "structure encoder")->check(CLI::IsMember({"graph", "rnn", "none"}));
  t->add_option("--epochs", train.epochs, "override max_epochs");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "score a checkpoint or a prediction dump");
  auto* eval_ckpt = e->add_option("--checkpoint", eval.checkpoint, "checkpoint to evaluate");
  auto* eval_corpus = e->add_option("--corpus", eval.corpus, "corpus file or directory with test.jsonl");
  auto* eval_pred = e->add_option("--predictions", eval.predictions, "rescore an existing prediction dump");
  eval_ckpt->needs(eval_corpus);
  eval_corpus->needs(eval_ckpt);
  eval_pred->excludes(eval_ckpt);
  e->add_option("--out", eval.out, "output directory")->required();
  e->add_option("--labels", eval.labels, "comma separated strategies to score (default: all)");
  e->add_flag("!--no-generate", eval.generate, "skip response generation and BLEU");
  e->add_flag("!--no-traces", eval.traces, "skip writing attention traces");

  ExplainArgs explain;
  auto* x = app.add_subcommand("explain", "influence maps and association reports from traces");
  x->add_option("--traces", explain.traces, "traces.jsonl written by eval")->required()->check(CLI::ExistingFile);
  x->add_option("--checkpoint", explain.checkpoint, "checkpoint whose strategy vocabulary to use");
  x->add_option("--out", explain.out, "output directory")->required();
  x->add_flag("--dot", explain.dot, "also write one Graphviz file per dialogue");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "write a synthetic corpus with planted dependencies");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--dialogues", synth.dialogues, "number of dialogues")->check(CLI::PositiveNumber);
  s->add_option("--turns", synth.turns, "turns per dialogue")->check(CLI::PositiveNumber);
  s->add_option("--noise", synth.noise, "per-label noise rate")->check(CLI::Range(0.0, 1.0));
  s->add_option("--trigger-rate", synth.trigger_rate, "per-turn trigger rate")->check(CLI::Range(0.0, 1.0));
  s->add_option("--rules", synth.rules, "trigger>consequence[:lag[:p]],... (default: three lag-1 rules)");
  s->add_option("--seed", synth.seed, "generator seed");
  s->add_option("--valid-fraction", synth.valid_fraction)->check(CLI::Range(0.0, 0.5));
  s->add_option("--test-fraction", synth.test_fraction)->check(CLI::Range(0.0, 0.5));

  ServeArgs serve;
  auto* v = app.add_subcommand("serve", "run the HTTP negotiation service");
  v->add_option("--checkpoint", serve.checkpoint, "checkpoint to serve")->required()->check(CLI::ExistingFile);
  v->add_option("--tagger-rules", serve.tagger_rules, "tagger rule table (default: built in)");
  v->add_option("--host", serve.host, "bind address");
  v->add_option("--port", serve.port, "port (0 picks a free one)")->check(CLI::Range(0, 65535));

  ChatArgs chat;
  auto* c = app.add_subcommand("chat", "negotiate against a checkpoint in the terminal");
  c->add_option("--checkpoint", chat.checkpoint, "checkpoint")->required()->check(CLI::ExistingFile);
  c->add_option("--tagger-rules", chat.tagger_rules, "tagger rule table (default: built in)");
  c->add_option("--listed", chat.listed, "listed price")->required();
  c->add_option("--target", chat.target, "buyer target price")->required();
  c->add_option("--title", chat.title, "item title");

  ImportArgs import;
  auto* i = app.add_subcommand("import", "convert CraigslistBargain JSON into the corpus format");
  i->add_option("--in", import.input, "CraigslistBargain JSON file")->required()->check(CLI::ExistingFile);
  i->add_option("--out", import.out, "output JSONL corpus")->required();
  i->add_option("--min-turns", import.min_turns, "drop shorter dialogues");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

  try {
    if (*t) return run_train(train);
    if (*e) {
      if (eval.predictions.empty() && eval.checkpoint.empty()) {
        spdlog::error("eval needs --checkpoint/--corpus or --predictions");
        return 2;
      }
      return run_eval(eval);
    }
    if (*x) return run_explain(explain);
    if (*s) return run_synth(synth);
    if (*v) return run_serve(serve);
    if (*c) return run_chat(chat);
    if (*i) return run_import(import);
  } catch (const std::exception& err) {
    spdlog::error("{}", err.what());
    return 1;
  }
  return 2;
}
