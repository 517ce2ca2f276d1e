#include <gtest/gtest.h>

#include <set>

#include "negograph/graph.hpp"
#include "negograph/rng.hpp"
#include "oracles.hpp"

using namespace negograph;
using negograph::oracle::brute_force_edges;

namespace {

using Sets = std::vector<std::vector<LabelId>>;

Sets random_sets(nd::Xoshiro256& rng, std::size_t max_turns, std::size_t labels) {
  Sets s(1 + rng.below(max_turns));
  for (auto& turn : s) {
    const std::size_t k = rng.below(4);
    std::set<LabelId> pick;
    while (pick.size() < k) pick.insert(rng.below(labels));
    turn.assign(pick.begin(), pick.end());
  }
  if (s.front().empty()) s.front().push_back(0);
  return s;
}

}  // namespace

TEST(BuildGraph, CountsTwoOneThree) {
  const Sets turns = {{0, 1}, {2}, {3, 4, 5}};
  const auto g = build_graph(turns, 22);
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.edge_count(), 2u * 1 + 2 * 3 + 1 * 3);
  const auto expected = brute_force_edges(turns);
  const std::set<std::pair<std::size_t, std::size_t>> got(g.edges().begin(), g.edges().end());
  EXPECT_EQ(got, expected);
}

TEST(BuildGraph, SingleTurnHasNoEdges) {
  const Sets turns = {{3, 7, 9}};
  const auto g = build_graph(turns, 22);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildGraph, Errors) {
  EXPECT_THROW(build_graph(Sets{{0, 30}}, 22), VocabularyError);
  EXPECT_THROW(build_graph(Sets{{1, 1}}, 22), std::invalid_argument);
  EXPECT_THROW(build_graph(Sets{{}, {}}, 22), std::invalid_argument);
}

TEST(BuildGraph, NodesFollowTurnOrder) {
  const Sets turns = {{4}, {}, {1, 2}};
  const auto g = build_graph(turns, 22);
  ASSERT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.nodes()[0], (GraphNode{0, 4}));
  EXPECT_EQ(g.nodes()[1], (GraphNode{2, 1}));
  EXPECT_EQ(g.nodes()[2], (GraphNode{2, 2}));
  EXPECT_EQ(g.turn_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(BuildGraph, RandomSequencesMatchBruteForce) {
  nd::Xoshiro256 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const Sets turns = random_sets(rng, 12, 22);
    const auto g = build_graph(turns, 22);
    const auto expected = brute_force_edges(turns);
    EXPECT_EQ(g.edge_count(), expected.size());
    const std::set<std::pair<std::size_t, std::size_t>> got(g.edges().begin(), g.edges().end());
    ASSERT_EQ(got, expected);

    // in/out degree of a node in turn t: nodes before t / nodes after t
    std::vector<std::size_t> before(turns.size() + 1, 0);
    for (std::size_t t = 0; t < turns.size(); ++t) before[t + 1] = before[t] + turns[t].size();
    const auto adj = g.adjacency();
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      const std::size_t t = g.nodes()[n].turn;
      double out = 0, in = 0;
      for (std::size_t m = 0; m < g.node_count(); ++m) {
        out += adj(n, m);
        in += adj(m, n);
      }
      EXPECT_EQ(in, static_cast<double>(before[t]));
      EXPECT_EQ(out, static_cast<double>(g.node_count() - before[t + 1]));
      EXPECT_EQ(g.in_neighbors(n).size(), before[t]);
    }
  }
}

TEST(BuildGraph, IsAcyclic) {
  nd::Xoshiro256 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = build_graph(random_sets(rng, 10, 22), 22);
    // every edge goes strictly forward in time, so turn order is a topological order
    for (const auto& [src, dst] : g.edges()) {
      EXPECT_LT(g.nodes()[src].turn, g.nodes()[dst].turn);
    }
  }
}

TEST(ExtendGraph, MatchesBatchBuildOnEveryPrefix) {
  nd::Xoshiro256 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Sets turns = random_sets(rng, 10, 22);
    StrategyGraph g(22);
    for (std::size_t t = 0; t < turns.size(); ++t) {
      g = extend_graph(g, turns[t]);
      const Sets prefix(turns.begin(), turns.begin() + static_cast<std::ptrdiff_t>(t + 1));
      const auto batch = build_graph(prefix, 22);
      ASSERT_EQ(g, batch);
      EXPECT_EQ(g.edges(), batch.edges());
    }
  }
}

TEST(ExtendGraph, EmptySetLeavesGraphUnchanged) {
  const auto g = build_graph(Sets{{0, 1}, {2}}, 22);
  const auto h = extend_graph(g, {});
  EXPECT_EQ(g, h);
  EXPECT_EQ(h.turn_count(), g.turn_count() + 1);
}

TEST(DaGraph, ClosedFormEdgeCount) {
  for (std::size_t t = 1; t <= 30; ++t) {
    std::vector<LabelId> acts(t);
    for (std::size_t i = 0; i < t; ++i) acts[i] = i % 14;
    const auto g = build_da_graph(acts, 14);
    EXPECT_EQ(g.node_count(), t);
    EXPECT_EQ(g.edge_count(), t * (t - 1) / 2);
  }
}

TEST(AttentionMask, SelfLoopsAndDirection) {
  const auto g = build_graph(Sets{{0}, {1, 2}}, 22);
  const auto m = g.attention_mask(true);
  // row = destination, column = source
  EXPECT_EQ(m(1, 0), 1.0);
  EXPECT_EQ(m(0, 1), 0.0);
  EXPECT_EQ(m(1, 2), 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m(i, i), 1.0);
  const auto n = g.attention_mask(false);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(n(i, i), 0.0);
}

TEST(GraphJson, ListsNodesAndEdges) {
  const auto g = build_graph(Sets{{kStartStrategy}, {7}}, 22);
  const auto j = graph_to_json(g, default_strategy_vocab());
  ASSERT_EQ(j["nodes"].size(), 2u);
  EXPECT_EQ(j["nodes"][1]["label"], "propose");
  EXPECT_EQ(j["edges"], nlohmann::json::parse("[[0,1]]"));
}
