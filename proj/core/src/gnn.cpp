#include "negograph/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace negograph {

using nd::Tensor;
using nd::Var;

// ---- GAT --------------------------------------------------------------------

GatLayer::GatLayer(nd::ParameterStore& store, const std::string& name, std::size_t in,
                   std::size_t out, double slope, nd::Xoshiro256& rng)
    : slope_(slope) {
  w_ = &store.add_glorot(name + ".w", in, out, rng);
  a_src_ = &store.add_glorot(name + ".a_src", out, 1, rng);
  a_dst_ = &store.add_glorot(name + ".a_dst", out, 1, rng);
  b_ = &store.add(name + ".b", 1, out);
}

GatLayer::Output GatLayer::forward(nd::Tape& tape, Var z, const Tensor& mask) const {
  if (mask.rows() != z.rows() || mask.cols() != z.rows()) {
    throw nd::ShapeError("gat: mask " + mask.shape_string() + " for " +
                         std::to_string(z.rows()) + " nodes");
  }
  const Var h = nd::matmul(z, tape.param(*w_));
  const Var s_src = nd::matmul(h, tape.param(*a_src_));
  const Var s_dst = nd::matmul(h, tape.param(*a_dst_));
  // e(i, j) scores edge j -> i
  const Var e = nd::leaky_relu(nd::outer_sum(s_dst, nd::transpose(s_src)), slope_);
  const Var alpha = nd::softmax_rows(e, mask);
  const Var out = nd::elu(nd::add_row(nd::matmul(alpha, h), tape.param(*b_)));
  return {out, alpha};
}

// ---- pooling ----------------------------------------------------------------

std::size_t pooled_size(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("pooling ratio must be in (0, 1]");
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, n == 0 ? 0 : 1, n);
}

AsapPool::AsapPool(nd::ParameterStore& store, const std::string& name, std::size_t dim,
                   double ratio, double slope, nd::Xoshiro256& rng)
    : ratio_(ratio), slope_(slope) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("pooling ratio must be in (0, 1]");
  w_query_ = &store.add_glorot(name + ".w_query", dim, 1, rng);
  w_key_ = &store.add_glorot(name + ".w_key", dim, 1, rng);
  w_self_ = &store.add_glorot(name + ".w_self", dim, 1, rng);
  w_center_ = &store.add_glorot(name + ".w_center", dim, 1, rng);
  w_neigh_ = &store.add_glorot(name + ".w_neigh", dim, 1, rng);
  b_fit_ = &store.add(name + ".b_fit", 1, 1);
}

Tensor pool_mask(const Tensor& mask, const Tensor& s, const std::vector<std::size_t>& kept) {
  const std::size_t n = mask.rows();
  // t = S A, with A(p, q) = mask(q, p) off the diagonal
  Tensor t(n, n);
  for (std::size_t u : kept) {
    for (std::size_t p = 0; p < n; ++p) {
      const double sup = s(u, p);
      if (sup == 0.0) continue;
      for (std::size_t q = 0; q < n; ++q) {
        if (q != p && mask(q, p) != 0.0) t(u, q) += sup;
      }
    }
  }
  const std::size_t k = kept.size();
  Tensor out(k, k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) {
        out(a, a) = 1.0;
        continue;
      }
      double link = 0.0;
      for (std::size_t q = 0; q < n; ++q) link += t(kept[a], q) * s(kept[b], q);
      // edge kept[a] -> kept[b], stored as mask(dst, src)
      if (link > 0.0) out(b, a) = 1.0;
    }
  }
  return out;
}

AsapPool::Output AsapPool::forward(nd::Tape& tape, Var z, const Tensor& mask) const {
  const std::size_t n = z.rows();
  if (n == 0) throw std::invalid_argument("pooling: empty graph");

  const Var xq = nd::masked_row_max(z, mask);
  const Var q = nd::matmul(xq, tape.param(*w_query_));
  const Var k = nd::matmul(z, tape.param(*w_key_));
  const Var logits = nd::leaky_relu(nd::outer_sum(q, nd::transpose(k)), slope_);
  const Var s = nd::softmax_rows(logits, mask);
  const Var xc = nd::matmul(s, z);

  Tensor neigh_mean(n, n);
  Tensor has_neigh(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t deg = 0;
    for (std::size_t j = 0; j < n; ++j) deg += (j != i && mask(i, j) != 0.0) ? 1 : 0;
    if (deg == 0) continue;
    has_neigh(i, 0) = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && mask(i, j) != 0.0) neigh_mean(i, j) = 1.0 / static_cast<double>(deg);
    }
  }
  const Var self_term = nd::add_row(nd::matmul(xc, tape.param(*w_self_)), tape.param(*b_fit_));
  const Var center = nd::mul(nd::matmul(xc, tape.param(*w_center_)), tape.constant(has_neigh));
  const Var neigh =
      nd::matmul(tape.constant(std::move(neigh_mean)), nd::matmul(xc, tape.param(*w_neigh_)));
  const Var phi = nd::sigmoid(nd::add(self_term, nd::sub(center, neigh)));

  Output out;
  const Tensor& phiv = phi.value();
  out.fitness.assign(phiv.values().begin(), phiv.values().end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.fitness[a] > out.fitness[b]; });
  order.resize(pooled_size(n, ratio_));
  std::sort(order.begin(), order.end());
  out.kept = std::move(order);

  out.z = nd::mul_col(nd::gather_rows(xc, out.kept), nd::gather_rows(phi, out.kept));
  out.assignment = s.value();
  out.mask = pool_mask(mask, out.assignment, out.kept);
  return out;
}

Var readout(Var z) {
  if (z.rows() == 0) throw std::invalid_argument("readout: empty graph");
  const Var parts[] = {nd::mean_rows(z), nd::max_rows(z)};
  return nd::concat_cols(parts);
}

// ---- structure encoder ------------------------------------------------------

StructureEncoder::StructureEncoder(nd::ParameterStore& store, const std::string& name,
                                   std::size_t label_count, const GnnConfig& config,
                                   nd::Xoshiro256& rng)
    : config_(config) {
  if (config.layers == 0) throw std::invalid_argument("structure encoder needs at least one layer");
  const std::size_t d = config.hidden_dim;
  embed_ = &store.add_normal(name + ".embed", label_count, d, 1.0 / std::sqrt(double(d)), rng);
  if (config.turn_recency) {
    recency_ = &store.add_normal(name + ".recency", 1, d, 1.0 / std::sqrt(double(d)), rng);
  }
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = name + ".l" + std::to_string(l);
    gat_.emplace_back(store, p + ".gat", d, d, config.leaky_slope, rng);
    pool_.emplace_back(store, p + ".pool", d, config.pool_ratio, config.leaky_slope, rng);
  }
  fc1_ = nd::Linear(store, name + ".fc1", 2 * d, config.fc_hidden, rng);
  fc2_ = nd::Linear(store, name + ".fc2", config.fc_hidden, config.output_dim, rng);
}

StructureEncoder::Output StructureEncoder::encode(nd::Tape& tape, const StrategyGraph& graph,
                                                  bool training,
                                                  nd::Xoshiro256* dropout_rng) const {
  if (graph.node_count() == 0) throw std::invalid_argument("structure encoder: empty graph");
  Output out;
  out.trace.nodes = graph.nodes();

  const auto labels = graph.node_labels();
  Var z = nd::gather_rows(tape.param(*embed_), labels);
  if (recency_ != nullptr) {
    const std::size_t last = graph.turn_count() - 1;
    Tensor age(labels.size(), 1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      age(i, 0) = std::log1p(static_cast<double>(last - graph.nodes()[i].turn));
    }
    z = nd::add(z, nd::matmul(tape.constant(std::move(age)), tape.param(*recency_)));
  }
  Tensor mask = graph.attention_mask(true);

  Var summary;
  for (std::size_t l = 0; l < gat_.size(); ++l) {
    auto g = gat_[l].forward(tape, z, mask);
    LayerTrace lt;
    lt.node_count = mask.rows();
    const Tensor& a = g.alpha.value();
    for (std::size_t i = 0; i < mask.rows(); ++i) {
      for (std::size_t j = 0; j < mask.cols(); ++j) {
        if (mask(i, j) != 0.0) lt.alpha.push_back({j, i, a(i, j)});
      }
    }
    Var zg = g.z;
    if (config_.dropout > 0.0 && training) {
      if (dropout_rng == nullptr) throw std::invalid_argument("structure encoder: dropout needs an rng");
      zg = nd::dropout(zg, config_.dropout, training, *dropout_rng);
    }
    auto p = pool_[l].forward(tape, zg, mask);
    lt.assignment = std::move(p.assignment);
    lt.kept = p.kept;
    lt.fitness = std::move(p.fitness);
    out.trace.layers.push_back(std::move(lt));

    const Var r = readout(p.z);
    summary = l == 0 ? r : nd::add(summary, r);
    z = p.z;
    mask = std::move(p.mask);
  }
  out.h = fc2_(tape, nd::tanh(fc1_(tape, summary)));
  return out;
}

// ---- trace serialization ----------------------------------------------------

nlohmann::json trace_to_json(const AttentionTrace& trace, const LabelVocab* vocab) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : trace.nodes) {
    nlohmann::json label = vocab != nullptr ? nlohmann::json(vocab->label(n.label))
                                            : nlohmann::json(n.label);
    nodes.push_back({{"turn", n.turn}, {"label", std::move(label)}});
  }
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : trace.layers) {
    nlohmann::json alpha = nlohmann::json::array();
    for (const auto& e : l.alpha) alpha.push_back({{"src", e.src}, {"dst", e.dst}, {"w", e.weight}});
    nlohmann::json s = nlohmann::json::array();
    for (std::size_t r = 0; r < l.assignment.rows(); ++r) {
      auto row = l.assignment.row_span(r);
      s.push_back(std::vector<double>(row.begin(), row.end()));
    }
    layers.push_back({{"alpha", std::move(alpha)},
                      {"clusters", {{"S", std::move(s)}, {"kept", l.kept}, {"fitness", l.fitness}}}});
  }
  return {{"nodes", std::move(nodes)}, {"layers", std::move(layers)}};
}

AttentionTrace trace_from_json(const nlohmann::json& j, const LabelVocab* vocab) {
  AttentionTrace t;
  if (auto it = j.find("nodes"); it != j.end()) {
    for (const auto& n : *it) {
      GraphNode node;
      node.turn = n.at("turn").get<std::size_t>();
      const auto& label = n.at("label");
      if (label.is_string()) {
        if (vocab == nullptr) throw std::invalid_argument("trace: string labels need a vocabulary");
        node.label = vocab->id(label.get<std::string>());
      } else {
        node.label = label.get<LabelId>();
      }
      t.nodes.push_back(node);
    }
  }
  for (const auto& jl : j.at("layers")) {
    LayerTrace l;
    std::size_t max_id = 0;
    for (const auto& e : jl.at("alpha")) {
      AttentionEdge edge{e.at("src").get<std::size_t>(), e.at("dst").get<std::size_t>(),
                         e.at("w").get<double>()};
      max_id = std::max({max_id, edge.src + 1, edge.dst + 1});
      l.alpha.push_back(edge);
    }
    const auto& c = jl.at("clusters");
    const auto& s = c.at("S");
    const std::size_t rows = s.size();
    const std::size_t cols = rows == 0 ? 0 : s.front().size();
    l.assignment = Tensor(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      if (s[r].size() != cols) throw std::invalid_argument("trace: ragged S matrix");
      for (std::size_t q = 0; q < cols; ++q) l.assignment(r, q) = s[r][q].get<double>();
    }
    l.kept = c.at("kept").get<std::vector<std::size_t>>();
    l.fitness = c.at("fitness").get<std::vector<double>>();
    l.node_count = std::max(max_id, cols);
    t.layers.push_back(std::move(l));
  }
  return t;
}

AttentionTrace truncate_trace(const AttentionTrace& trace, std::size_t max_edges) {
  AttentionTrace out = trace;
  for (auto& l : out.layers) {
    if (l.alpha.size() <= max_edges) continue;
    std::vector<std::size_t> idx(l.alpha.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = l.alpha[a];
      const auto& y = l.alpha[b];
      if (x.dst != y.dst) return x.dst > y.dst;
      return x.src > y.src;
    });
    idx.resize(max_edges);
    std::sort(idx.begin(), idx.end());
    std::vector<AttentionEdge> kept;
    kept.reserve(max_edges);
    for (std::size_t i : idx) kept.push_back(l.alpha[i]);
    l.alpha = std::move(kept);
  }
  return out;
}

}  // namespace negograph
