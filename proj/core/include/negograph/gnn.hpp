#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "negograph/autodiff.hpp"
#include "negograph/graph.hpp"
#include "negograph/layers.hpp"

namespace negograph {

struct GnnConfig {
  std::size_t hidden_dim = 64;
  std::size_t layers = 2;
  double pool_ratio = 0.8;
  double leaky_slope = 0.2;
  double dropout = 0.0;
  std::size_t fc_hidden = 64;
  std::size_t output_dim = 64;
  /// Adds log(1 + turns since the node's turn) times a learned vector to the
  /// label embedding. Off by default (plain label features).
  bool turn_recency = false;
};

struct AttentionEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 0.0;
};

/// What one GAT + pooling stage saw and decided. Node ids index the stage's
/// input graph; stage 0 ids are the graph's own node ids.
struct LayerTrace {
  std::size_t node_count = 0;
  /// One entry per in-neighborhood edge, self-loops included.
  std::vector<AttentionEdge> alpha;
  /// Row c holds cluster c's membership weights over nodes (rows sum to 1).
  nd::Tensor assignment;
  std::vector<std::size_t> kept;
  std::vector<double> fitness;
};

struct AttentionTrace {
  std::vector<GraphNode> nodes;
  std::vector<LayerTrace> layers;
};

/// {"nodes":[...], "layers":[{"alpha":[{"src","dst","w"}],
///   "clusters":{"S":[[...]], "kept":[...], "fitness":[...]}}]}
/// Node labels are written as names when a vocabulary is given.
nlohmann::json trace_to_json(const AttentionTrace& trace, const LabelVocab* vocab = nullptr);
AttentionTrace trace_from_json(const nlohmann::json& j, const LabelVocab* vocab = nullptr);
/// Keeps only the `max_edges` most recent layer-0 edges (highest dst, then src).
AttentionTrace truncate_trace(const AttentionTrace& trace, std::size_t max_edges);

/// Single-head graph attention over in-neighborhoods:
///   H = Z W, e(j -> i) = leaky(H_i a_dst + H_j a_src), alpha = softmax over
///   the in-neighborhood of i, Z'_i = elu(sum_j alpha_ij H_j + b).
class GatLayer {
 public:
  GatLayer() = default;
  GatLayer(nd::ParameterStore& store, const std::string& name, std::size_t in, std::size_t out,
           double slope, nd::Xoshiro256& rng);

  struct Output {
    nd::Var z;
    /// alpha(i, j) = weight of edge j -> i; zero outside the mask.
    nd::Var alpha;
  };
  /// mask(i, j) = 1 iff j is in the in-neighborhood of i (self included).
  Output forward(nd::Tape& tape, nd::Var z, const nd::Tensor& mask) const;

 private:
  nd::Parameter* w_ = nullptr;
  nd::Parameter* a_src_ = nullptr;
  nd::Parameter* a_dst_ = nullptr;
  nd::Parameter* b_ = nullptr;
  double slope_ = 0.2;
};

/// Cluster-assignment pooling. Every node i seeds a cluster over its
/// in-neighborhood (self included). Membership weights come from attention
/// between a max-pooled cluster query and each member; cluster features are the
/// weighted member sums. Fitness is a sigmoid of a local-extremum score
///   x_c w1 + b + mean_{j in N(c)} (x_c w2 - x_j w3)
/// and the top ceil(ratio * N) clusters survive, scaled by their fitness.
class AsapPool {
 public:
  AsapPool() = default;
  AsapPool(nd::ParameterStore& store, const std::string& name, std::size_t dim, double ratio,
           double slope, nd::Xoshiro256& rng);

  struct Output {
    nd::Var z;
    /// Attention mask of the pooled graph (self-loops included).
    nd::Tensor mask;
    nd::Tensor assignment;
    std::vector<std::size_t> kept;
    std::vector<double> fitness;
  };
  Output forward(nd::Tape& tape, nd::Var z, const nd::Tensor& mask) const;

  double ratio() const { return ratio_; }

 private:
  nd::Parameter* w_query_ = nullptr;
  nd::Parameter* w_key_ = nullptr;
  nd::Parameter* b_att_ = nullptr;
  nd::Parameter* w_self_ = nullptr;
  nd::Parameter* w_center_ = nullptr;
  nd::Parameter* w_neigh_ = nullptr;
  nd::Parameter* b_fit_ = nullptr;
  double ratio_ = 0.8;
  double slope_ = 0.2;
};

/// Number of clusters kept from n nodes.
std::size_t pooled_size(std::size_t n, double ratio);

/// Pooled edge u -> v iff sum_{p,q} S(u,p) A(p,q) S(v,q) > 0 for kept u, v,
/// with A(p,q) = 1 iff p -> q (taken from the off-diagonal of `mask`).
/// Returns the pooled attention mask with self-loops.
nd::Tensor pool_mask(const nd::Tensor& mask, const nd::Tensor& assignment,
                     const std::vector<std::size_t>& kept);

/// [mean over nodes || max over nodes].
nd::Var readout(nd::Var z);

/// Label embedding -> l x (GAT -> pooling -> readout) -> sum -> two-layer FC.
class StructureEncoder {
 public:
  StructureEncoder() = default;
  StructureEncoder(nd::ParameterStore& store, const std::string& name, std::size_t label_count,
                   const GnnConfig& config, nd::Xoshiro256& rng);

  struct Output {
    nd::Var h;
    AttentionTrace trace;
  };
  Output encode(nd::Tape& tape, const StrategyGraph& graph, bool training,
                nd::Xoshiro256* dropout_rng = nullptr) const;

  const GnnConfig& config() const { return config_; }
  std::size_t output_dim() const { return config_.output_dim; }

 private:
  GnnConfig config_{};
  nd::Parameter* embed_ = nullptr;
  nd::Parameter* recency_ = nullptr;
  std::vector<GatLayer> gat_;
  std::vector<AsapPool> pool_;
  nd::Linear fc1_;
  nd::Linear fc2_;
};

}  // namespace negograph
