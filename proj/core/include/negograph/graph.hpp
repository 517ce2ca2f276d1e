#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "negograph/tensor.hpp"
#include "negograph/vocab.hpp"

namespace negograph {

struct Corpus;

struct GraphNode {
  std::size_t turn = 0;
  LabelId label = 0;
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Forward-directed graph over (turn, label) nodes: every node of an earlier
/// turn has an edge to every node of each later turn. Self-loops are implicit
/// and only materialize in attention_mask().
///
/// Edges are kept ordered by (dst, src), which is also the order incremental
/// extension produces, so batch and incremental builds compare equal.
class StrategyGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;  // (src, dst)

  StrategyGraph() = default;
  explicit StrategyGraph(std::size_t label_count) : label_count_(label_count) {}

  /// Appends one turn. An empty set only advances the turn counter.
  void extend(std::span<const LabelId> labels);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t turn_count() const { return turn_count_; }
  std::size_t label_count() const { return label_count_; }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Non-self in-neighbors of `node`, ascending.
  const std::vector<std::size_t>& in_neighbors(std::size_t node) const { return in_.at(node); }
  std::vector<LabelId> node_labels() const;

  /// mask(i, j) = 1 iff j -> i is an edge, or i == j when `self_loops`.
  nd::Tensor attention_mask(bool self_loops = true) const;
  /// adj(i, j) = 1 iff i -> j (row = source), no self-loops.
  nd::Tensor adjacency() const;
  /// Rows are the embedding rows of the node labels.
  nd::Tensor features(const nd::Tensor& embeddings) const;

  /// Structural equality: same nodes and edges (the turn counter is ignored so
  /// that trailing empty turns do not matter).
  friend bool operator==(const StrategyGraph& a, const StrategyGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t label_count_ = 0;
  std::size_t turn_count_ = 0;
  std::vector<GraphNode> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> in_;
};

/// Throws VocabularyError on a label id >= label_count, std::invalid_argument
/// on a duplicated label within a turn or when every turn is empty.
StrategyGraph build_graph(std::span<const std::vector<LabelId>> turn_label_sets,
                          std::size_t label_count);
/// Copy of `graph` with one more turn.
StrategyGraph extend_graph(const StrategyGraph& graph, std::span<const LabelId> new_turn_labels);
/// One node per turn.
StrategyGraph build_da_graph(std::span<const LabelId> dialogue_acts, std::size_t label_count);

/// {"nodes": [{"turn", "label"}], "edges": [[src, dst], ...]}
nlohmann::json graph_to_json(const StrategyGraph& graph, const LabelVocab& vocab);

struct GraphStats {
  std::size_t graphs = 0;
  std::size_t max_nodes = 0;
  double mean_nodes = 0.0;
  std::size_t max_edges = 0;
  double mean_edges = 0.0;
};

/// Node/edge statistics of the full-dialogue strategy graphs of a corpus.
GraphStats strategy_graph_stats(const Corpus& corpus);

}  // namespace negograph
