#include "spnb/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "spnb/errors.hpp"

namespace spnb {

Graph::Graph(std::vector<std::vector<Vertex>> adjacency) : adjacency_(std::move(adjacency)) {
  std::size_t half_edges = 0;
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    half_edges += nbrs.size();
  }
  edge_count_ = half_edges / 2;
}

Graph Graph::from_edge_list(int vertex_count, std::span<const Edge> pairs) {
  if (vertex_count < 1) {
    throw ValidationError("graph needs at least one vertex, got " + std::to_string(vertex_count));
  }
  std::vector<std::vector<Vertex>> adjacency(static_cast<std::size_t>(vertex_count));
  for (const Edge& e : pairs) {
    if (e.u < 0 || e.u >= vertex_count || e.v < 0 || e.v >= vertex_count) {
      throw ValidationError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") has a vertex outside [0," + std::to_string(vertex_count) + ")");
    }
    if (e.u == e.v) {
      throw ValidationError("self-loop at vertex " + std::to_string(e.u));
    }
    adjacency[e.u].push_back(e.v);
    adjacency[e.v].push_back(e.u);
  }
  return Graph(std::move(adjacency));
}

void Graph::check_vertex(Vertex v) const {
  if (v < 0 || v >= vertex_count()) {
    throw ValidationError("vertex " + std::to_string(v) + " out of range [0," +
                          std::to_string(vertex_count()) + ")");
  }
}

int Graph::degree(Vertex v) const {
  check_vertex(v);
  return static_cast<int>(adjacency_[v].size());
}

std::span<const Vertex> Graph::neighbours(Vertex v) const {
  check_vertex(v);
  return adjacency_[v];
}

bool Graph::has_edge(Vertex a, Vertex b) const {
  check_vertex(a);
  check_vertex(b);
  const auto& nbrs = adjacency_[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (Vertex u = 0; u < vertex_count(); ++u) {
    for (Vertex v : adjacency_[u]) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

int Graph::min_degree() const noexcept {
  int m = adjacency_.empty() ? 0 : static_cast<int>(adjacency_.front().size());
  for (const auto& nbrs : adjacency_) m = std::min(m, static_cast<int>(nbrs.size()));
  return m;
}

int Graph::max_degree() const noexcept {
  int m = 0;
  for (const auto& nbrs : adjacency_) m = std::max(m, static_cast<int>(nbrs.size()));
  return m;
}

Graph lattice_graph(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw ValidationError("lattice dimensions must be positive");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2 * rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Vertex v = r * cols + c;
      if (c + 1 < cols) edges.push_back({v, v + 1});
      if (r + 1 < rows) edges.push_back({v, v + cols});
    }
  }
  return Graph::from_edge_list(rows * cols, edges);
}

std::vector<std::vector<Vertex>> connected_components(const Graph& g) {
  const int k = g.vertex_count();
  std::vector<int> label(static_cast<std::size_t>(k), -1);
  std::vector<std::vector<Vertex>> components;
  std::vector<Vertex> stack;
  for (Vertex start = 0; start < k; ++start) {
    if (label[start] >= 0) continue;
    const int id = static_cast<int>(components.size());
    components.emplace_back();
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      components[id].push_back(v);
      for (Vertex w : g.neighbours(v)) {
        if (label[w] < 0) {
          label[w] = id;
          stack.push_back(w);
        }
      }
    }
    std::sort(components[id].begin(), components[id].end());
  }
  return components;
}

namespace {

void require_min_degree_one(const Graph& g, const char* what) {
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) == 0) {
      throw ValidationError(std::string(what) + ": vertex " + std::to_string(v) + " has degree 0");
    }
  }
}

}  // namespace

FeasibleSubgraph::FeasibleSubgraph(Graph base)
    : base_(std::make_shared<const Graph>(std::move(base))), kept_(*base_) {
  require_min_degree_one(kept_, "infeasible graph");
}

FeasibleSubgraph::FeasibleSubgraph(std::shared_ptr<const Graph> base, Graph kept)
    : base_(std::move(base)), kept_(std::move(kept)) {
  if (!base_) throw ValidationError("feasible subgraph needs a base graph");
  if (kept_.vertex_count() != base_->vertex_count()) {
    throw ValidationError("subgraph vertex count differs from base graph");
  }
  for (const Edge& e : kept_.edges()) {
    if (!base_->has_edge(e.u, e.v)) {
      throw ValidationError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") is not in the base graph");
    }
  }
  require_min_degree_one(kept_, "infeasible subgraph");
}

FeasibleSubgraph FeasibleSubgraph::remove_edges(std::span<const Edge> pairs) const {
  std::vector<Edge> removed;
  removed.reserve(pairs.size());
  for (const Edge& p : pairs) {
    const Edge e = make_edge(p.u, p.v);
    if (e.u == e.v || !kept_.has_edge(e.u, e.v)) {
      throw ValidationError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            ") is not present in the subgraph");
    }
    removed.push_back(e);
  }
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());

  std::vector<Edge> remaining;
  remaining.reserve(kept_.edge_count());
  for (const Edge& e : kept_.edges()) {
    if (!std::binary_search(removed.begin(), removed.end(), e)) remaining.push_back(e);
  }
  return FeasibleSubgraph(base_, Graph::from_edge_list(kept_.vertex_count(), remaining));
}

std::vector<Edge> FeasibleSubgraph::deleted_edges() const {
  std::vector<Edge> out;
  for (const Edge& e : base_->edges()) {
    if (!kept_.has_edge(e.u, e.v)) out.push_back(e);
  }
  return out;
}

}  // namespace spnb
