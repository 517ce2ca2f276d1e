#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "negograph/model.hpp"
#include "negograph/optim.hpp"
#include "negograph/train.hpp"

namespace negograph {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary checkpoint: "NGCKPT01", config hash, a JSON header (config,
/// vocabularies, ratio boundaries, class weights), every parameter as
/// (name, rows, cols, f64 values) in store order, then optional Adam state.
void save_checkpoint(const std::filesystem::path& path, const NegotiationModel& model,
                     const ClassWeights& weights, const nd::Adam* optimizer = nullptr);

struct LoadedModel {
  std::unique_ptr<NegotiationModel> model;
  ClassWeights weights;
  std::optional<nd::Adam> optimizer;
  std::uint64_t config_hash = 0;
};

/// Rebuilds the model and restores its parameters. The stored hash must
/// match the stored config, and `expected_hash` when one is given.
LoadedModel load_checkpoint(const std::filesystem::path& path,
                            std::optional<std::uint64_t> expected_hash = std::nullopt,
                            std::shared_ptr<const EmbeddingTable> external = nullptr);

}  // namespace negograph
