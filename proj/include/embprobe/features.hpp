#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "embprobe/errors.hpp"
#include "embprobe/graph.hpp"
#include "embprobe/parallel.hpp"

namespace embprobe {

enum class Feature { DG, DC, TC, CLU, EC, PR, BC };

inline constexpr std::array<Feature, 7> kAllFeatures = {
    Feature::DG, Feature::DC, Feature::TC, Feature::CLU, Feature::EC, Feature::PR, Feature::BC};

inline std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::DG: return "DG";
    case Feature::DC: return "DC";
    case Feature::TC: return "TC";
    case Feature::CLU: return "CLU";
    case Feature::EC: return "EC";
    case Feature::PR: return "PR";
    case Feature::BC: return "BC";
  }
  return "?";
}

inline std::optional<Feature> parse_feature(std::string_view name) {
  for (Feature f : kAllFeatures)
    if (feature_name(f) == name) return f;
  return std::nullopt;
}

// Per-vertex topological features, one column per feature.
struct FeatureTable {
  std::vector<std::string> vertices;
  std::vector<std::uint64_t> degree;
  std::vector<double> degree_centrality;
  std::vector<std::uint64_t> triangles;
  std::vector<double> clustering;
  std::vector<double> eigenvector;
  std::vector<double> pagerank;
  std::vector<double> betweenness;

  std::size_t size() const noexcept { return vertices.size(); }

  std::vector<double> column(Feature f) const {
    auto as_double = [](const std::vector<std::uint64_t>& v) {
      return std::vector<double>(v.begin(), v.end());
    };
    switch (f) {
      case Feature::DG: return as_double(degree);
      case Feature::DC: return degree_centrality;
      case Feature::TC: return as_double(triangles);
      case Feature::CLU: return clustering;
      case Feature::EC: return eigenvector;
      case Feature::PR: return pagerank;
      case Feature::BC: return betweenness;
    }
    return {};
  }
};

struct IterationOptions {
  double tol = 1e-8;
  std::size_t max_iter = 1000;
};

inline std::vector<std::uint64_t> degree(const Graph& g) {
  std::vector<std::uint64_t> out(g.vertex_count());
  for (VertexId v = 0; v < out.size(); ++v) out[v] = g.degree(v);
  return out;
}

// DG(v) / |V| (not |V|-1).
inline std::vector<double> degree_centrality(const Graph& g) {
  const double n = static_cast<double>(g.vertex_count());
  std::vector<double> out(g.vertex_count());
  for (VertexId v = 0; v < out.size(); ++v) out[v] = static_cast<double>(g.degree(v)) / n;
  return out;
}

// Number of edges among the neighbors of each vertex, by merging sorted
// adjacency lists.
inline std::vector<std::uint64_t> triangle_count(const Graph& g) {
  std::vector<std::uint64_t> out(g.vertex_count(), 0);
  for (const auto& e : g.edges()) {
    auto a = g.neighbors(e.first);
    auto b = g.neighbors(e.second);
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        // Each triangle {u,v,w} is seen from its three edges; credit only
        // the vertex opposite the current edge.
        ++out[*ia];
        ++ia;
        ++ib;
      }
    }
  }
  return out;
}

// 2*TC / (d (d-1)); 0 when d < 2.
inline std::vector<double> local_clustering(const Graph& g,
                                            const std::vector<std::uint64_t>& triangles) {
  std::vector<double> out(g.vertex_count(), 0.0);
  for (VertexId v = 0; v < out.size(); ++v) {
    const double d = static_cast<double>(g.degree(v));
    if (d >= 2) out[v] = 2.0 * static_cast<double>(triangles[v]) / (d * (d - 1.0));
  }
  return out;
}

inline std::vector<double> local_clustering(const Graph& g) {
  return local_clustering(g, triangle_count(g));
}

namespace detail {

inline double l2_norm(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace detail

// Principal eigenvector of A by power iteration, starting from the
// uniform vector. Iterates on A + I, which has the same eigenvectors but
// no +/-lambda tie on bipartite graphs (where plain A oscillates).
// Stops when the L-infinity change between normalized iterates drops
// below tol. Output has unit L2 norm and its largest-magnitude entry
// positive.
inline std::vector<double> eigenvector_centrality(const Graph& g, IterationOptions opt = {}) {
  if (g.edge_count() == 0) throw GraphError("eigenvector centrality needs at least one edge");
  const std::size_t n = g.vertex_count();
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> next(n);
  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    for (VertexId v = 0; v < n; ++v) {
      double s = x[v];
      for (VertexId u : g.neighbors(v)) s += x[u];
      next[v] = s;
    }
    const double norm = detail::l2_norm(next);
    double change = 0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] /= norm;
      change = std::max(change, std::abs(next[v] - x[v]));
    }
    x.swap(next);
    if (change < opt.tol) {
      std::size_t arg = 0;
      for (std::size_t v = 1; v < n; ++v)
        if (std::abs(x[v]) > std::abs(x[arg])) arg = v;
      if (x[arg] < 0)
        for (double& v : x) v = -v;
      // Iterating from a positive vector keeps entries >= 0 up to rounding.
      for (double& v : x) v = std::max(v, 0.0);
      const double final_norm = detail::l2_norm(x);
      for (double& v : x) v /= final_norm;
      return x;
    }
  }
  throw ConvergenceError("eigenvector centrality did not converge in " +
                             std::to_string(opt.max_iter) + " iterations",
                         x);
}

// PageRank fixed point with damping `damping`; out-degree is the degree.
// Mass of degree-0 vertices is spread uniformly. Stops on L1 change < tol.
inline std::vector<double> pagerank(const Graph& g, double damping = 0.85,
                                    IterationOptions opt = {}) {
  const std::size_t n = g.vertex_count();
  if (n == 0) throw GraphError("pagerank of an empty graph");
  const double nd = static_cast<double>(n);
  std::vector<double> pr(n, 1.0 / nd);
  std::vector<double> next(n);
  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    double dangling = 0;
    for (VertexId v = 0; v < n; ++v)
      if (g.degree(v) == 0) dangling += pr[v];
    const double base = (1.0 - damping) / nd + damping * dangling / nd;
    for (VertexId v = 0; v < n; ++v) {
      double s = 0;
      for (VertexId u : g.neighbors(v)) s += pr[u] / static_cast<double>(g.degree(u));
      next[v] = base + damping * s;
    }
    double total = 0;
    for (double v : next) total += v;
    double change = 0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] /= total;
      change += std::abs(next[v] - pr[v]);
    }
    pr.swap(next);
    if (change < opt.tol) return pr;
  }
  throw ConvergenceError("pagerank did not converge in " + std::to_string(opt.max_iter) +
                             " iterations",
                         pr);
}

// Brandes accumulation, unnormalized, each unordered pair {s,t} counted
// once. Sources are processed in fixed chunks and the per-chunk partial
// sums reduced in chunk order, so the result does not depend on
// `workers`.
inline std::vector<double> betweenness(const Graph& g, std::size_t workers = 1) {
  const std::size_t n = g.vertex_count();
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks);

  parallel_for(chunks, workers, [&](std::size_t c) {
    std::vector<double> acc(n, 0.0);
    std::vector<std::int64_t> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<VertexId> order;
    order.reserve(n);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t s = c * kChunk; s < end; ++s) {
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(sigma.begin(), sigma.end(), 0.0);
      std::fill(delta.begin(), delta.end(), 0.0);
      order.clear();
      dist[s] = 0;
      sigma[s] = 1;
      order.push_back(static_cast<VertexId>(s));
      for (std::size_t head = 0; head < order.size(); ++head) {
        const VertexId v = order[head];
        for (VertexId w : g.neighbors(v)) {
          if (dist[w] < 0) {
            dist[w] = dist[v] + 1;
            order.push_back(w);
          }
          if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
        }
      }
      for (std::size_t i = order.size(); i-- > 1;) {
        const VertexId w = order[i];
        for (VertexId v : g.neighbors(w))
          if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        acc[w] += delta[w];
      }
    }
    partial[c] = std::move(acc);
  });

  std::vector<double> bc(n, 0.0);
  for (const auto& p : partial)
    for (std::size_t v = 0; v < n; ++v) bc[v] += p[v];
  for (double& v : bc) v *= 0.5;
  return bc;
}

struct FeatureOptions {
  double damping = 0.85;
  IterationOptions iteration{};
  std::size_t workers = 1;
};

inline FeatureTable compute_all(const Graph& g, const FeatureOptions& opt = {}) {
  FeatureTable t;
  t.vertices = g.labels();
  t.degree = degree(g);
  t.degree_centrality = degree_centrality(g);
  t.triangles = triangle_count(g);
  t.clustering = local_clustering(g, t.triangles);
  t.eigenvector = eigenvector_centrality(g, opt.iteration);
  t.pagerank = pagerank(g, opt.damping, opt.iteration);
  t.betweenness = betweenness(g, opt.workers);
  return t;
}

// CSV with header "vertex,DG,DC,TC,CLU,EC,PR,BC"; reals at full precision.
inline void write_feature_csv(const FeatureTable& t, std::ostream& out) {
  out << "vertex,DG,DC,TC,CLU,EC,PR,BC\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.vertices[i] << ',' << t.degree[i] << ',' << t.degree_centrality[i] << ','
        << t.triangles[i] << ',' << t.clustering[i] << ',' << t.eigenvector[i] << ','
        << t.pagerank[i] << ',' << t.betweenness[i] << '\n';
  }
}

inline FeatureTable read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty feature file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "vertex,DG,DC,TC,CLU,EC,PR,BC")
    throw ParseError(1, "unexpected feature header '" + line + "'");
  FeatureTable t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 8) throw ParseError(line_no, "expected 8 columns");
    try {
      t.vertices.push_back(cells[0]);
      t.degree.push_back(std::stoull(cells[1]));
      t.degree_centrality.push_back(std::stod(cells[2]));
      t.triangles.push_back(std::stoull(cells[3]));
      t.clustering.push_back(std::stod(cells[4]));
      t.eigenvector.push_back(std::stod(cells[5]));
      t.pagerank.push_back(std::stod(cells[6]));
      t.betweenness.push_back(std::stod(cells[7]));
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "bad number in '" + line + "'");
    }
  }
  return t;
}

}  // namespace embprobe
