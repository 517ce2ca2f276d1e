#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "negograph/gnn.hpp"
#include "negograph/vocab.hpp"

namespace negograph {

struct InfluenceEntry {
  std::size_t source = 0;
  double raw = 0.0;
  double normalized = 0.0;
};

/// Min-max normalized incoming first-layer attention of one node, self-loop
/// excluded. Entries are ordered by source id.
struct InfluenceMap {
  std::size_t target = 0;
  std::vector<InfluenceEntry> entries;
  /// Set when every raw weight is equal (or there is none).
  bool uninformative = false;

  /// Source with the largest raw weight (lowest id on ties).
  std::optional<std::size_t> strongest() const;
};

/// Throws LookupError when `target` is not a node of the trace.
InfluenceMap influence_map(const AttentionTrace& trace, std::size_t target);

nlohmann::json influence_to_json(const InfluenceMap& map, const AttentionTrace& trace,
                                 const LabelVocab* vocab = nullptr);

/// Symmetric strategy x strategy co-clustering scores.
class AssociationTable {
 public:
  explicit AssociationTable(std::size_t labels = 0);

  void record(std::size_t a, std::size_t b, double weight);

  std::size_t labels() const { return labels_; }
  /// Number of recordings in either direction.
  std::size_t count(std::size_t a, std::size_t b) const;
  /// Mean of the (a,b) and (b,a) directional means; absent when the pair was
  /// never co-clustered. A direction without recordings is skipped.
  std::optional<double> score(std::size_t a, std::size_t b) const;

 private:
  std::size_t index(std::size_t a, std::size_t b) const { return a * labels_ + b; }
  std::size_t labels_ = 0;
  std::vector<double> sum_;
  std::vector<std::size_t> count_;
};

/// For every kept first-layer cluster and every ordered pair of distinct
/// members labelled (a, b), records member a's S weight in direction (a, b).
/// Throws std::invalid_argument on an empty trace set.
AssociationTable association_scores(std::span<const AttentionTrace> traces, const LabelVocab& strategies);

/// "strategy_a,strategy_b,score,count" for a < b, diagonal and absent pairs
/// omitted, sorted by descending score.
std::string association_csv(const AssociationTable& table, const LabelVocab& strategies);

/// Mean normalized attention on first-layer edges that cross the first
/// propose turn (src before it, dst after it) versus edges that stay on one
/// side. Edges touching the propose turn itself are not counted.
struct BoundaryReport {
  std::size_t dialogues = 0;
  std::size_t crossing_edges = 0;
  std::size_t non_crossing_edges = 0;
  double crossing_mean = 0.0;
  double non_crossing_mean = 0.0;

  bool empty() const { return dialogues == 0; }
};

BoundaryReport propose_boundary_report(std::span<const AttentionTrace> traces, LabelId propose);
nlohmann::json boundary_to_json(const BoundaryReport& report);

/// Graphviz digraph of the first-layer attention with pen width scaled by the
/// normalized incoming weight.
std::string trace_to_dot(const AttentionTrace& trace, const LabelVocab* vocab = nullptr);

}  // namespace negograph
