#include "negograph/interpret.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "negograph/dialenc.hpp"

namespace negograph {

std::optional<std::size_t> InfluenceMap::strongest() const {
  std::optional<std::size_t> best;
  double w = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries) {
    if (e.raw > w) {
      w = e.raw;
      best = e.source;
    }
  }
  return best;
}

InfluenceMap influence_map(const AttentionTrace& trace, std::size_t target) {
  if (trace.layers.empty() || target >= trace.layers.front().node_count) {
    throw LookupError("node " + std::to_string(target) + " is not in the trace");
  }
  InfluenceMap map;
  map.target = target;
  for (const auto& e : trace.layers.front().alpha) {
    if (e.dst == target && e.src != target) map.entries.push_back({e.src, e.weight, 0.0});
  }
  std::sort(map.entries.begin(), map.entries.end(),
            [](const InfluenceEntry& a, const InfluenceEntry& b) { return a.source < b.source; });
  if (map.entries.empty()) {
    map.uninformative = true;
    return map;
  }
  if (map.entries.size() == 1) {
    map.entries.front().normalized = 1.0;
    return map;
  }
  auto [lo, hi] = std::minmax_element(map.entries.begin(), map.entries.end(),
                                      [](const auto& a, const auto& b) { return a.raw < b.raw; });
  const double min = lo->raw;
  const double range = hi->raw - min;
  if (!(range > 0.0)) {
    map.uninformative = true;
    return map;
  }
  for (auto& e : map.entries) e.normalized = (e.raw - min) / range;
  return map;
}

nlohmann::json influence_to_json(const InfluenceMap& map, const AttentionTrace& trace,
                                 const LabelVocab* vocab) {
  auto node_json = [&](std::size_t id) {
    nlohmann::json j = {{"id", id}};
    if (id < trace.nodes.size()) {
      j["turn"] = trace.nodes[id].turn;
      if (vocab != nullptr) {
        j["label"] = vocab->label(trace.nodes[id].label);
      } else {
        j["label"] = trace.nodes[id].label;
      }
    }
    return j;
  };
  nlohmann::json sources = nlohmann::json::array();
  for (const auto& e : map.entries) {
    auto j = node_json(e.source);
    j["raw"] = e.raw;
    j["normalized"] = e.normalized;
    sources.push_back(std::move(j));
  }
  return {{"target", node_json(map.target)}, {"uninformative", map.uninformative}, {"sources", sources}};
}

AssociationTable::AssociationTable(std::size_t labels)
    : labels_(labels), sum_(labels * labels, 0.0), count_(labels * labels, 0) {}

void AssociationTable::record(std::size_t a, std::size_t b, double weight) {
  if (a >= labels_ || b >= labels_) throw std::out_of_range("association label out of range");
  sum_[index(a, b)] += weight;
  ++count_[index(a, b)];
}

std::size_t AssociationTable::count(std::size_t a, std::size_t b) const {
  if (a == b) return count_[index(a, a)];
  return count_[index(a, b)] + count_[index(b, a)];
}

std::optional<double> AssociationTable::score(std::size_t a, std::size_t b) const {
  double total = 0.0;
  int directions = 0;
  for (auto i : {index(a, b), index(b, a)}) {
    if (count_[i] == 0) continue;
    total += sum_[i] / static_cast<double>(count_[i]);
    ++directions;
  }
  if (directions == 0) return std::nullopt;
  return total / directions;
}

AssociationTable association_scores(std::span<const AttentionTrace> traces, const LabelVocab& strategies) {
  if (traces.empty()) throw std::invalid_argument("association scores need at least one trace");
  AssociationTable table(strategies.size());
  for (const auto& trace : traces) {
    if (trace.layers.empty()) continue;
    const auto& layer = trace.layers.front();
    const auto& S = layer.assignment;
    for (auto c : layer.kept) {
      std::vector<std::size_t> members;
      for (std::size_t m = 0; m < S.cols(); ++m)
        if (S(c, m) > 0.0) members.push_back(m);
      for (auto x : members) {
        for (auto y : members) {
          if (x == y) continue;
          table.record(trace.nodes.at(x).label, trace.nodes.at(y).label, S(c, x));
        }
      }
    }
  }
  return table;
}

std::string association_csv(const AssociationTable& table, const LabelVocab& strategies) {
  struct Row {
    std::size_t a, b;
    double score;
    std::size_t count;
  };
  std::vector<Row> rows;
  for (std::size_t a = 0; a < table.labels(); ++a) {
    for (std::size_t b = a + 1; b < table.labels(); ++b) {
      if (auto s = table.score(a, b)) rows.push_back({a, b, *s, table.count(a, b)});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) { return x.score > y.score; });
  std::ostringstream out;
  out << "strategy_a,strategy_b,score,count\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.4f", r.score);
    out << strategies.label(r.a) << ',' << strategies.label(r.b) << ',' << buf << ',' << r.count << '\n';
  }
  return out.str();
}

BoundaryReport propose_boundary_report(std::span<const AttentionTrace> traces, LabelId propose) {
  BoundaryReport report;
  double crossing = 0.0, other = 0.0;
  for (const auto& trace : traces) {
    if (trace.layers.empty()) continue;
    std::optional<std::size_t> boundary;
    for (const auto& n : trace.nodes)
      if (n.label == propose && (!boundary || n.turn < *boundary)) boundary = n.turn;
    if (!boundary) continue;
    ++report.dialogues;
    const auto p = *boundary;
    for (std::size_t dst = 0; dst < trace.layers.front().node_count; ++dst) {
      const auto dst_turn = trace.nodes.at(dst).turn;
      if (dst_turn == p) continue;
      for (const auto& e : influence_map(trace, dst).entries) {
        const auto src_turn = trace.nodes.at(e.source).turn;
        if (src_turn == p) continue;
        if (src_turn < p && dst_turn > p) {
          crossing += e.normalized;
          ++report.crossing_edges;
        } else {
          other += e.normalized;
          ++report.non_crossing_edges;
        }
      }
    }
  }
  if (report.crossing_edges > 0) report.crossing_mean = crossing / static_cast<double>(report.crossing_edges);
  if (report.non_crossing_edges > 0)
    report.non_crossing_mean = other / static_cast<double>(report.non_crossing_edges);
  return report;
}

nlohmann::json boundary_to_json(const BoundaryReport& report) {
  if (report.empty()) return {{"dialogues", 0}, {"empty", true}};
  return {{"dialogues", report.dialogues},
          {"empty", false},
          {"crossing_edges", report.crossing_edges},
          {"non_crossing_edges", report.non_crossing_edges},
          {"crossing_mean", report.crossing_mean},
          {"non_crossing_mean", report.non_crossing_mean}};
}

std::string trace_to_dot(const AttentionTrace& trace, const LabelVocab* vocab) {
  std::ostringstream out;
  out << "digraph influence {\n  rankdir=LR;\n";
  for (std::size_t i = 0; i < trace.nodes.size(); ++i) {
    const auto& n = trace.nodes[i];
    out << "  n" << i << " [label=\"t" << n.turn << ": "
        << (vocab != nullptr ? vocab->label(n.label) : std::to_string(n.label)) << "\"];\n";
  }
  if (!trace.layers.empty()) {
    char buf[64];
    for (std::size_t dst = 0; dst < trace.layers.front().node_count; ++dst) {
      for (const auto& e : influence_map(trace, dst).entries) {
        std::snprintf(buf, sizeof(buf), "%.3f\", penwidth=%.2f", e.raw, 0.5 + 3.0 * e.normalized);
        out << "  n" << e.source << " -> n" << dst << " [label=\"" << buf << "];\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace negograph
