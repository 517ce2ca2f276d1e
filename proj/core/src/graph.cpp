#include "negograph/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "negograph/corpus.hpp"

namespace negograph {

void StrategyGraph::extend(std::span<const LabelId> labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= label_count_) {
      throw VocabularyError("graph: label id " + std::to_string(labels[i]) + " out of range (" +
                            std::to_string(label_count_) + " labels)");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (labels[j] == labels[i]) {
        throw std::invalid_argument("graph: label " + std::to_string(labels[i]) +
                                    " repeated within turn " + std::to_string(turn_count_));
      }
    }
  }
  const std::size_t earlier = nodes_.size();
  for (LabelId label : labels) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({turn_count_, label});
    in_.emplace_back();
    auto& in = in_.back();
    in.reserve(earlier);
    for (std::size_t src = 0; src < earlier; ++src) {
      edges_.emplace_back(src, id);
      in.push_back(src);
    }
  }
  ++turn_count_;
}

std::vector<LabelId> StrategyGraph::node_labels() const {
  std::vector<LabelId> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.label);
  return out;
}

nd::Tensor StrategyGraph::attention_mask(bool self_loops) const {
  const std::size_t n = nodes_.size();
  nd::Tensor mask(n, n);
  for (const auto& [src, dst] : edges_) mask(dst, src) = 1.0;
  if (self_loops) {
    for (std::size_t i = 0; i < n; ++i) mask(i, i) = 1.0;
  }
  return mask;
}

nd::Tensor StrategyGraph::adjacency() const {
  const std::size_t n = nodes_.size();
  nd::Tensor adj(n, n);
  for (const auto& [src, dst] : edges_) adj(src, dst) = 1.0;
  return adj;
}

nd::Tensor StrategyGraph::features(const nd::Tensor& embeddings) const {
  if (embeddings.rows() < label_count_) {
    throw nd::ShapeError("graph: embedding table has " + std::to_string(embeddings.rows()) +
                         " rows for " + std::to_string(label_count_) + " labels");
  }
  nd::Tensor z(nodes_.size(), embeddings.cols());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto src = embeddings.row_span(nodes_[i].label);
    std::copy(src.begin(), src.end(), z.row_span(i).begin());
  }
  return z;
}

StrategyGraph build_graph(std::span<const std::vector<LabelId>> turn_label_sets,
                          std::size_t label_count) {
  StrategyGraph g(label_count);
  for (const auto& labels : turn_label_sets) g.extend(labels);
  if (g.node_count() == 0) throw std::invalid_argument("graph: every turn is empty");
  return g;
}

StrategyGraph extend_graph(const StrategyGraph& graph, std::span<const LabelId> new_turn_labels) {
  StrategyGraph out = graph;
  out.extend(new_turn_labels);
  return out;
}

StrategyGraph build_da_graph(std::span<const LabelId> dialogue_acts, std::size_t label_count) {
  StrategyGraph g(label_count);
  for (LabelId act : dialogue_acts) g.extend(std::span<const LabelId>(&act, 1));
  if (g.node_count() == 0) throw std::invalid_argument("graph: empty dialogue act sequence");
  return g;
}

nlohmann::json graph_to_json(const StrategyGraph& graph, const LabelVocab& vocab) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes()) {
    nodes.push_back({{"turn", n.turn}, {"label", vocab.label(n.label)}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [src, dst] : graph.edges()) edges.push_back({src, dst});
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

GraphStats strategy_graph_stats(const Corpus& corpus) {
  GraphStats s;
  double node_sum = 0.0, edge_sum = 0.0;
  for (const auto& d : corpus.dialogues) {
    std::size_t nodes = 0, edges = 0;
    for (const auto& t : d.turns) {
      edges += nodes * t.strategies.size();
      nodes += t.strategies.size();
    }
    ++s.graphs;
    s.max_nodes = std::max(s.max_nodes, nodes);
    s.max_edges = std::max(s.max_edges, edges);
    node_sum += static_cast<double>(nodes);
    edge_sum += static_cast<double>(edges);
  }
  if (s.graphs > 0) {
    s.mean_nodes = node_sum / static_cast<double>(s.graphs);
    s.mean_edges = edge_sum / static_cast<double>(s.graphs);
  }
  return s;
}

}  // namespace negograph
