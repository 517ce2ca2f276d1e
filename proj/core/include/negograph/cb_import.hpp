#pragma once

#include <cstddef>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "negograph/corpus.hpp"
#include "negograph/tagger.hpp"

namespace negograph {

struct ImportStats {
  std::size_t records = 0;
  std::size_t imported = 0;
  /// Message turns without annotations that went through the tagger.
  std::size_t tagged_turns = 0;
  std::size_t skipped = 0;
};

/// Maps CraigslistBargain JSON (an array of {"scenario":{"kbs":[...]},
/// "events":[...], "outcome":{...}} records) onto the corpus schema.
/// Message events become turns; offer/accept/reject/quit events become turns
/// carrying the matching action act. Events may carry "strategies" and
/// "dialogue_act" annotations; unannotated messages are tagged with `tagger`.
/// Records without a buyer and a seller knowledge base or without events are
/// skipped. Throws SchemaError for records that are present but malformed.
Corpus import_craigslist(const nlohmann::json& records, const KeywordTagger& tagger,
                         ImportStats* stats = nullptr,
                         const LabelVocab& strategies = default_strategy_vocab(),
                         const LabelVocab& dialogue_acts = default_dialogue_act_vocab());

Corpus import_craigslist_file(const std::filesystem::path& path, const KeywordTagger& tagger,
                              ImportStats* stats = nullptr);

}  // namespace negograph
