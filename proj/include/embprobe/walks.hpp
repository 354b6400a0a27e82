#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "embprobe/errors.hpp"
#include "embprobe/graph.hpp"
#include "embprobe/parallel.hpp"
#include "embprobe/random.hpp"

namespace embprobe {

// Uniform walks (p = q = 1 semantics) or second-order biased walks.
struct WalkStrategy {
  enum class Kind { uniform, biased } kind = Kind::uniform;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter

  static WalkStrategy uniform() { return {}; }
  static WalkStrategy biased(double p, double q) { return {Kind::biased, p, q}; }
};

struct WalkCorpus {
  std::vector<std::vector<VertexId>> walks;
  std::size_t walk_length = 0;
  std::size_t walks_per_vertex = 0;
  WalkStrategy strategy;
  std::uint64_t seed = 0;
};

inline std::vector<VertexId> uniform_walk(const Graph& g, VertexId start, std::size_t length,
                                          Rng& rng) {
  std::vector<VertexId> walk{start};
  walk.reserve(length);
  while (walk.size() < length) {
    auto nb = g.neighbors(walk.back());
    if (nb.empty()) break;
    walk.push_back(nb[rng.below(nb.size())]);
  }
  return walk;
}

// Unnormalized transition weights out of `current` given the vertex the
// walk came from: 1/p back to `previous`, 1 to common neighbors of
// `previous`, 1/q to everything else. Aligned with g.neighbors(current).
inline std::vector<double> biased_transition_weights(const Graph& g, VertexId previous,
                                                     VertexId current, double p, double q) {
  auto nb = g.neighbors(current);
  std::vector<double> w(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    if (nb[i] == previous)
      w[i] = 1.0 / p;
    else if (g.has_edge(previous, nb[i]))
      w[i] = 1.0;
    else
      w[i] = 1.0 / q;
  }
  return w;
}

// Draws an index from unnormalized weights.
inline std::size_t sample_weighted(const std::vector<double>& weights, Rng& rng) {
  double total = 0;
  for (double w : weights) total += w;
  double target = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    target -= weights[i];
    if (target < 0) return i;
  }
  return weights.size() - 1;
}

inline std::vector<VertexId> biased_walk(const Graph& g, VertexId start, std::size_t length,
                                         double p, double q, Rng& rng) {
  if (!(p > 0) || !(q > 0)) throw InvalidArgument("biased walk needs p > 0 and q > 0");
  std::vector<VertexId> walk{start};
  walk.reserve(length);
  while (walk.size() < length) {
    const VertexId cur = walk.back();
    auto nb = g.neighbors(cur);
    if (nb.empty()) break;
    if (walk.size() == 1) {
      walk.push_back(nb[rng.below(nb.size())]);
      continue;
    }
    const auto w = biased_transition_weights(g, walk[walk.size() - 2], cur, p, q);
    walk.push_back(nb[sample_weighted(w, rng)]);
  }
  return walk;
}

// `walks_per_vertex` passes; each pass visits every vertex once as a root
// in a seeded shuffled order. Each walk has its own RNG seeded from
// (seed, pass, root), so the corpus is the same for any worker count.
inline WalkCorpus generate_corpus(const Graph& g, std::size_t walks_per_vertex,
                                  std::size_t length, WalkStrategy strategy, std::uint64_t seed,
                                  std::size_t workers = 1) {
  if (walks_per_vertex == 0 || length == 0)
    throw InvalidArgument("walks_per_vertex and length must be positive");
  const std::size_t n = g.vertex_count();
  WalkCorpus corpus;
  corpus.walk_length = length;
  corpus.walks_per_vertex = walks_per_vertex;
  corpus.strategy = strategy;
  corpus.seed = seed;
  corpus.walks.resize(walks_per_vertex * n);

  std::vector<VertexId> roots(walks_per_vertex * n);
  for (std::size_t pass = 0; pass < walks_per_vertex; ++pass) {
    auto slice = std::span(roots).subspan(pass * n, n);
    std::iota(slice.begin(), slice.end(), VertexId{0});
    Rng order_rng(derive_seed(seed, "walk-order", pass));
    order_rng.shuffle(slice);
  }
  parallel_for(roots.size(), workers, [&](std::size_t i) {
    const std::size_t pass = i / n;
    Rng rng(derive_seed(seed, "walk", pass, roots[i]));
    corpus.walks[i] = strategy.kind == WalkStrategy::Kind::uniform
                          ? uniform_walk(g, roots[i], length, rng)
                          : biased_walk(g, roots[i], length, strategy.p, strategy.q, rng);
  });
  return corpus;
}

struct ContextPair {
  VertexId center;
  VertexId context;
  friend bool operator==(const ContextPair&, const ContextPair&) = default;
};

struct ContextPairs {
  std::vector<ContextPair> pairs;
  std::size_t window = 0;
};

// Calls fn(center, context) for every skip-gram pair of one walk, in
// position order, offsets -c..c excluding 0 and clipped at both ends.
template <typename Fn>
void for_each_context_pair(std::span<const VertexId> walk, std::size_t window, Fn&& fn) {
  const std::size_t len = walk.size();
  for (std::size_t i = 0; i < len; ++i) {
    const std::size_t lo = i >= window ? i - window : 0;
    const std::size_t hi = std::min(len - 1, i + window);
    for (std::size_t j = lo; j <= hi; ++j)
      if (j != i) fn(walk[i], walk[j]);
  }
}

inline ContextPairs context_pairs(const WalkCorpus& corpus, std::size_t window) {
  if (window == 0) throw InvalidArgument("context window must be >= 1");
  ContextPairs out;
  out.window = window;
  for (const auto& walk : corpus.walks)
    for_each_context_pair(walk, window,
                          [&](VertexId c, VertexId x) { out.pairs.push_back({c, x}); });
  return out;
}

// One walk per line, space-separated original labels.
inline void write_corpus(const WalkCorpus& corpus, const Graph& g, std::ostream& out) {
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) out << (i ? " " : "") << g.label(walk[i]);
    out << '\n';
  }
}

}  // namespace embprobe
