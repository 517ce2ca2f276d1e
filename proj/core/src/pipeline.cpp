#include "negograph/pipeline.hpp"

namespace negograph {

std::vector<double> sale_ratios(const Corpus& corpus) {
  std::vector<double> out;
  for (const auto& d : corpus.dialogues)
    if (auto r = d.ratio()) out.push_back(*r);
  return out;
}

std::unique_ptr<NegotiationModel> make_model(const Config& config, const Corpus& train,
                                              std::shared_ptr<const EmbeddingTable> external) {
  config.validate();
  auto model = std::make_unique<NegotiationModel>(config, TokenVocab::build(train, config.token_min_count),
                                                  train.strategies, train.dialogue_acts, std::move(external));
  const auto ratios = sale_ratios(train);
  if (ratios.size() >= 5) model->boundaries = fit_class_boundaries(ratios);
  return model;
}

std::vector<EncodedDialogue> encode_for(const NegotiationModel& model, const Corpus& corpus) {
  return encode_corpus(corpus, model.tokens(), model.boundaries ? &*model.boundaries : nullptr);
}

ClassWeights class_weights_for(const NegotiationModel& model, const std::vector<EncodedDialogue>& train) {
  const auto& c = model.config();
  return compute_class_weights(train, model.target_strategy_count(), model.dialogue_acts().size(),
                               c.weighted_strategy_loss, c.weighted_da_loss);
}

}  // namespace negograph
