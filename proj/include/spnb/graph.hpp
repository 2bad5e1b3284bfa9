#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace spnb {

using Vertex = int;

/// Undirected edge stored in canonical order (u < v).
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Canonicalises an unordered pair. Does not validate.
constexpr Edge make_edge(Vertex a, Vertex b) noexcept {
  return a < b ? Edge{a, b} : Edge{b, a};
}

/// Simple undirected graph over dense vertex indices 0..K-1.
///
/// Adjacency is held as sorted per-vertex neighbour lists, so every
/// iteration over neighbours is in ascending index order. Values are
/// immutable once built; isolated vertices are allowed.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from unordered pairs, dropping duplicates (including
  /// reversed duplicates). Throws ValidationError on self-loops,
  /// out-of-range vertices or vertex_count < 1.
  static Graph from_edge_list(int vertex_count, std::span<const Edge> pairs);

  int vertex_count() const noexcept { return static_cast<int>(adjacency_.size()); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  int degree(Vertex v) const;
  std::span<const Vertex> neighbours(Vertex v) const;
  bool has_edge(Vertex a, Vertex b) const;

  /// All edges, canonical and sorted lexicographically.
  std::vector<Edge> edges() const;

  int min_degree() const noexcept;
  int max_degree() const noexcept;

  bool operator==(const Graph& other) const = default;

 private:
  explicit Graph(std::vector<std::vector<Vertex>> adjacency);
  void check_vertex(Vertex v) const;

  std::vector<std::vector<Vertex>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Rook adjacency on a rows x cols grid; vertex index is row * cols + col.
Graph lattice_graph(int rows, int cols);

/// Maximal connected vertex sets, each sorted, ordered by smallest member.
std::vector<std::vector<Vertex>> connected_components(const Graph& g);

/// A spanning subgraph of a base graph in which every vertex keeps at
/// least one incident edge. Edges can only be removed, never added.
class FeasibleSubgraph {
 public:
  /// The base graph itself; throws ValidationError if any vertex is isolated.
  explicit FeasibleSubgraph(Graph base);

  /// Validates that kept is a spanning subgraph of base with min degree 1.
  FeasibleSubgraph(std::shared_ptr<const Graph> base, Graph kept);

  const Graph& base() const noexcept { return *base_; }
  const Graph& kept() const noexcept { return kept_; }
  std::shared_ptr<const Graph> shared_base() const noexcept { return base_; }

  int vertex_count() const noexcept { return kept_.vertex_count(); }
  int degree(Vertex v) const { return kept_.degree(v); }
  std::span<const Vertex> neighbours(Vertex v) const { return kept_.neighbours(v); }

  /// Returns a new subgraph without the given edges. Throws ValidationError
  /// if an edge is not currently kept or if a vertex would become isolated.
  FeasibleSubgraph remove_edges(std::span<const Edge> pairs) const;

  /// Edges of base that are not kept, sorted.
  std::vector<Edge> deleted_edges() const;

 private:
  std::shared_ptr<const Graph> base_;
  Graph kept_;
};

}  // namespace spnb
