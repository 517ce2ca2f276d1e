#pragma once

#include <memory>
#include <vector>

#include "negograph/config.hpp"
#include "negograph/corpus.hpp"
#include "negograph/model.hpp"
#include "negograph/train.hpp"

namespace negograph {

/// Sale-to-list ratios of every dialogue that ended in a sale.
std::vector<double> sale_ratios(const Corpus& corpus);

/// Builds the token vocabulary and the outcome class boundaries from the
/// training split and constructs a freshly initialized model. Boundaries are
/// left unset when fewer than five training dialogues have a sale.
std::unique_ptr<NegotiationModel> make_model(const Config& config, const Corpus& train,
                                              std::shared_ptr<const EmbeddingTable> external = nullptr);

/// Encodes a split against the model's vocabulary and boundaries.
std::vector<EncodedDialogue> encode_for(const NegotiationModel& model, const Corpus& corpus);

/// Class weights of the training split as the config asks for them.
ClassWeights class_weights_for(const NegotiationModel& model, const std::vector<EncodedDialogue>& train);

}  // namespace negograph
