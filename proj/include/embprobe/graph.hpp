#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "embprobe/errors.hpp"

namespace embprobe {

using VertexId = std::uint32_t;

// Undirected edge stored with first < second.
struct Edge {
  VertexId first;
  VertexId second;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Immutable undirected simple graph in CSR form. Internal ids are dense
// 0..n-1; `label(v)` gives the original vertex label.
class Graph {
 public:
  Graph() = default;

  // Builds from dense ids. Self-loops and duplicates are rejected; use
  // load_edge_list for dirty input.
  Graph(std::vector<std::string> labels, std::vector<Edge> edges) : labels_(std::move(labels)) {
    const std::size_t n = labels_.size();
    for (auto& e : edges) {
      if (e.first >= n || e.second >= n) throw GraphError("edge endpoint out of range");
      if (e.first == e.second) throw GraphError("self-loop on vertex " + labels_[e.first]);
      if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw GraphError("duplicate edge");
    edges_ = std::move(edges);

    offsets_.assign(n + 1, 0);
    for (const auto& e : edges_) {
      ++offsets_[e.first + 1];
      ++offsets_[e.second + 1];
    }
    for (std::size_t v = 0; v < n; ++v) offsets_[v + 1] += offsets_[v];
    targets_.resize(offsets_[n]);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges_) {
      targets_[cursor[e.first]++] = e.second;
      targets_[cursor[e.second]++] = e.first;
    }
    for (std::size_t v = 0; v < n; ++v)
      std::sort(targets_.begin() + offsets_[v], targets_.begin() + offsets_[v + 1]);

    index_.reserve(n);
    for (std::size_t v = 0; v < n; ++v) {
      if (!index_.emplace(labels_[v], static_cast<VertexId>(v)).second)
        throw GraphError("duplicate vertex label '" + labels_[v] + "'");
    }
  }

  // Vertices labelled "0".."n-1".
  static Graph from_edges(std::size_t n, std::vector<Edge> edges) {
    std::vector<std::string> labels(n);
    for (std::size_t v = 0; v < n; ++v) labels[v] = std::to_string(v);
    return Graph(std::move(labels), std::move(edges));
  }

  std::size_t vertex_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  // Sorted, duplicate-free neighbor list.
  std::span<const VertexId> neighbors(VertexId v) const {
    check(v);
    return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }

  std::size_t degree(VertexId v) const {
    check(v);
    return offsets_[v + 1] - offsets_[v];
  }

  bool has_edge(VertexId u, VertexId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  // Row v of the adjacency matrix as 0/1 entries.
  std::vector<std::uint8_t> adjacency_row(VertexId v) const {
    std::vector<std::uint8_t> row(vertex_count(), 0);
    for (VertexId u : neighbors(v)) row[u] = 1;
    return row;
  }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(VertexId v) const {
    check(v);
    return labels_[v];
  }

  std::optional<VertexId> find(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.labels_ == b.labels_ && a.edges_ == b.edges_;
  }

 private:
  void check(VertexId v) const {
    if (v >= vertex_count())
      throw GraphError("vertex id " + std::to_string(v) + " out of range (|V| = " +
                       std::to_string(vertex_count()) + ")");
  }

  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<VertexId> targets_;
  std::unordered_map<std::string, VertexId> index_;
};

// Counts of what load_edge_list cleaned out of its input.
struct LoadReport {
  std::size_t data_lines = 0;
  std::size_t comment_lines = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

struct LoadedGraph {
  Graph graph;
  LoadReport report;
};

// Reads a SNAP-style edge list. '#' lines are comments, except
// "#! vertex <label>" which declares a vertex (possibly isolated).
// Labels get dense ids in order of first appearance. Edge direction is
// ignored; self-loops and repeated edges are dropped and counted.
inline LoadedGraph load_edge_list(std::istream& in) {
  LoadReport report;
  std::vector<std::string> labels;
  std::unordered_map<std::string, VertexId> ids;
  std::vector<Edge> edges;

  auto intern = [&](const std::string& label) {
    auto [it, inserted] = ids.emplace(label, static_cast<VertexId>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::string a, b, extra;
    if (!(tokens >> a)) continue;
    if (a.front() == '#') {
      if (a == "#!") {
        std::string directive;
        if (tokens >> directive && directive == "vertex") {
          if (!(tokens >> b) || (tokens >> extra))
            throw ParseError(line_no, "expected '#! vertex <label>'");
          intern(b);
        }
      }
      ++report.comment_lines;
      continue;
    }
    if (!(tokens >> b) || (tokens >> extra))
      throw ParseError(line_no, "expected two vertex labels, got '" + line + "'");
    ++report.data_lines;
    const VertexId u = intern(a);
    const VertexId v = intern(b);
    if (u == v) {
      ++report.self_loops_dropped;
      continue;
    }
    edges.push_back(u < v ? Edge{u, v} : Edge{v, u});
  }

  std::sort(edges.begin(), edges.end());
  const auto last = std::unique(edges.begin(), edges.end());
  report.duplicates_dropped = static_cast<std::size_t>(edges.end() - last);
  edges.erase(last, edges.end());
  if (edges.empty()) throw GraphError("edge list contains no edges");
  return {Graph(std::move(labels), std::move(edges)), report};
}

inline LoadedGraph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open graph file '" + path + "'");
  return load_edge_list(in);
}

// Writes one "u v" line per edge using original labels. Every vertex is
// declared first with "#! vertex" so a reload reproduces the same ids and
// keeps isolated vertices.
inline void write_edge_list(const Graph& g, std::ostream& out) {
  for (VertexId v = 0; v < g.vertex_count(); ++v) out << "#! vertex " << g.label(v) << '\n';
  for (const auto& e : g.edges()) out << g.label(e.first) << ' ' << g.label(e.second) << '\n';
}

}  // namespace embprobe
