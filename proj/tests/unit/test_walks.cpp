#include <gtest/gtest.h>

#include <map>

#include "embprobe/generators.hpp"
#include "embprobe/walks.hpp"

using namespace embprobe;

namespace {

void expect_valid_walk(const Graph& g, const std::vector<VertexId>& walk) {
  for (std::size_t i = 1; i < walk.size(); ++i) ASSERT_TRUE(g.has_edge(walk[i - 1], walk[i]));
}

}  // namespace

TEST(Walks, UniformWalksFollowEdges) {
  const Graph g = generators::karate_club();
  Rng rng(1);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const auto w = uniform_walk(g, v, 40, rng);
    EXPECT_EQ(w.size(), 40u);
    EXPECT_EQ(w.front(), v);
    expect_valid_walk(g, w);
  }
}

TEST(Walks, StopAtIsolatedVertex) {
  const Graph g = Graph::from_edges(3, {{0, 1}});
  Rng rng(1);
  EXPECT_EQ(uniform_walk(g, 2, 10, rng).size(), 1u);
  EXPECT_EQ(biased_walk(g, 2, 10, 1, 1, rng).size(), 1u);
}

TEST(Walks, UniformVisitFrequencyIsProportionalToDegree) {
  const Graph g = generators::karate_club();
  Rng rng(3);
  const auto w = uniform_walk(g, 0, 400000, rng);
  std::vector<double> visits(g.vertex_count(), 0);
  for (VertexId v : w) visits[v] += 1;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const double expected = static_cast<double>(g.degree(v)) / (2.0 * g.edge_count());
    EXPECT_NEAR(visits[v] / static_cast<double>(w.size()), expected, 0.1 * expected + 1e-3);
  }
}

TEST(Walks, BiasedTransitionWeights) {
  // 1 has neighbors 0 (previous), 2 (also adjacent to 0) and 3 (not).
  const Graph g = Graph::from_edges(4, {{0, 1}, {1, 2}, {0, 2}, {1, 3}});
  const auto w = biased_transition_weights(g, 0, 1, 0.5, 4.0);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0], 2.0);
  EXPECT_EQ(w[1], 1.0);
  EXPECT_EQ(w[2], 0.25);

  Rng rng(9);
  std::vector<double> counts(3, 0);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) counts[sample_weighted(w, rng)] += 1;
  const double total = 3.25;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(counts[i] / draws, w[i] / total, 0.005);
}

TEST(Walks, BiasedWalkRespectsReturnParameter) {
  // On a path, low p makes backtracking dominant.
  const Graph g = generators::cycle(20);
  Rng rng(4);
  auto backtrack_rate = [&](double p, double q) {
    std::size_t back = 0, steps = 0;
    for (int k = 0; k < 200; ++k) {
      const auto w = biased_walk(g, 0, 50, p, q, rng);
      for (std::size_t i = 2; i < w.size(); ++i, ++steps) back += w[i] == w[i - 2];
    }
    return static_cast<double>(back) / static_cast<double>(steps);
  };
  EXPECT_NEAR(backtrack_rate(0.25, 1.0), 4.0 / 5.0, 0.02);
  EXPECT_NEAR(backtrack_rate(1.0, 1.0), 0.5, 0.02);
  EXPECT_NEAR(backtrack_rate(4.0, 1.0), 0.25 / 1.25, 0.02);
  EXPECT_THROW(biased_walk(g, 0, 5, 0.0, 1.0, rng), InvalidArgument);
}

TEST(Walks, CorpusCoversEveryRootAndIsWorkerIndependent) {
  const Graph g = generators::karate_club();
  const auto a = generate_corpus(g, 3, 20, WalkStrategy::biased(0.5, 2.0), 11, 1);
  const auto b = generate_corpus(g, 3, 20, WalkStrategy::biased(0.5, 2.0), 11, 3);
  EXPECT_EQ(a.walks, b.walks);
  std::map<VertexId, int> roots;
  for (const auto& w : a.walks) {
    ++roots[w.front()];
    expect_valid_walk(g, w);
  }
  EXPECT_EQ(roots.size(), 34u);
  for (auto& [v, c] : roots) EXPECT_EQ(c, 3);
  const auto c = generate_corpus(g, 3, 20, WalkStrategy::biased(0.5, 2.0), 12, 1);
  EXPECT_NE(a.walks, c.walks);
}

TEST(Walks, ContextPairsClipAtWalkEnds) {
  WalkCorpus corpus;
  corpus.walks = {{0, 1, 2, 3}};
  const auto pairs = context_pairs(corpus, 2);
  const std::vector<ContextPair> expected = {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {1, 3},
                                             {2, 0}, {2, 1}, {2, 3}, {3, 1}, {3, 2}};
  EXPECT_EQ(pairs.pairs, expected);
  EXPECT_THROW(context_pairs(corpus, 0), InvalidArgument);
}
