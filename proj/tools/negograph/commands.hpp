#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace negograph::cli {

struct TrainArgs {
  std::filesystem::path corpus;
  std::filesystem::path valid;
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::size_t> epochs;
};

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path corpus;
  std::filesystem::path predictions;
  std::filesystem::path out;
  std::string labels;
  bool generate = true;
  bool traces = true;
};

struct ExplainArgs {
  std::filesystem::path traces;
  std::filesystem::path checkpoint;
  std::filesystem::path out;
  bool dot = false;
};

struct SynthArgs {
  std::filesystem::path out;
  std::size_t dialogues = 500;
  std::size_t turns = 8;
  double noise = 0.05;
  double trigger_rate = 0.4;
  std::string rules;
  std::uint64_t seed = 1;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
};

struct ServeArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path tagger_rules;
  std::string host = "127.0.0.1";
  int port = 8080;
};

struct ChatArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path tagger_rules;
  double listed = 0.0;
  double target = 0.0;
  std::string title = "the item";
};

struct ImportArgs {
  std::filesystem::path input;
  std::filesystem::path out;
  std::size_t min_turns = 5;
};

int run_train(const TrainArgs& args);
int run_eval(const EvalArgs& args);
int run_explain(const ExplainArgs& args);
int run_synth(const SynthArgs& args);
int run_serve(const ServeArgs& args);
int run_chat(const ChatArgs& args);
int run_import(const ImportArgs& args);

}  // namespace negograph::cli
