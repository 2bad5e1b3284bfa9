#include "spnb/graph.hpp"

#include <random>

#include <gtest/gtest.h>

#include "spnb/errors.hpp"
#include "test_support.hpp"

namespace spnb {
namespace {

using testing::cycle_graph;
using testing::path_graph;

TEST(GraphTest, FromEdgeListBuildsPath) {
  const std::vector<Edge> pairs = {{0, 1}, {1, 2}};
  const Graph g = Graph::from_edge_list(3, pairs);
  EXPECT_EQ(g.vertex_count(), 3);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_FALSE(g.has_edge(0, 2));
}

TEST(GraphTest, ReversedDuplicateCollapses) {
  const std::vector<Edge> pairs = {{0, 1}, {1, 0}};
  const Graph g = Graph::from_edge_list(3, pairs);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.degree(2), 0);
}

TEST(GraphTest, RejectsSelfLoopRangeAndEmpty) {
  const std::vector<Edge> loop = {{0, 0}};
  EXPECT_THROW(Graph::from_edge_list(2, loop), ValidationError);
  const std::vector<Edge> outside = {{0, 3}};
  EXPECT_THROW(Graph::from_edge_list(3, outside), ValidationError);
  EXPECT_THROW(Graph::from_edge_list(0, {}), ValidationError);
}

TEST(GraphTest, DegreeAndNeighbours) {
  const Graph p3 = path_graph(3);
  EXPECT_EQ(p3.degree(1), 2);
  EXPECT_EQ(p3.degree(0), 1);
  const auto n1 = p3.neighbours(1);
  EXPECT_EQ(std::vector<Vertex>(n1.begin(), n1.end()), (std::vector<Vertex>{0, 2}));
  const auto n0 = p3.neighbours(0);
  EXPECT_EQ(std::vector<Vertex>(n0.begin(), n0.end()), (std::vector<Vertex>{1}));
  const Graph c4 = cycle_graph(4);
  for (Vertex v = 0; v < 4; ++v) EXPECT_EQ(c4.degree(v), 2);
  const Graph empty = Graph::from_edge_list(3, {});
  EXPECT_TRUE(empty.neighbours(1).empty());
  EXPECT_THROW(p3.degree(3), ValidationError);
  EXPECT_THROW(p3.neighbours(-1), ValidationError);
}

TEST(GraphTest, LatticeShapes) {
  // Row-major numbering: the 2 x 2 square is the cycle 0-1-3-2.
  EXPECT_EQ(lattice_graph(2, 2).edges(), (std::vector<Edge>{{0, 1}, {0, 2}, {1, 3}, {2, 3}}));
  EXPECT_EQ(lattice_graph(1, 3), path_graph(3));
  EXPECT_EQ(lattice_graph(3, 3).edge_count(), 12u);
}

TEST(GraphTest, LatticeEdgeCountAndDegreeProperty) {
  for (int r = 1; r <= 7; ++r) {
    for (int c = 1; c <= 7; ++c) {
      const Graph g = lattice_graph(r, c);
      EXPECT_EQ(static_cast<int>(g.edge_count()), 2 * r * c - r - c) << r << "x" << c;
      EXPECT_LE(g.max_degree(), 4);
    }
  }
}

TEST(GraphTest, AdjacencyIsSymmetricOnRandomGraphs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = testing::random_connected_planar(20, rng);
    for (Vertex u = 0; u < g.vertex_count(); ++u) {
      for (Vertex v : g.neighbours(u)) {
        EXPECT_TRUE(g.has_edge(v, u));
        EXPECT_NE(u, v);
      }
    }
  }
}

TEST(GraphTest, ConnectedComponents) {
  const FeasibleSubgraph c4(cycle_graph(4));
  const std::vector<Edge> cut = {{1, 2}, {0, 3}};
  const auto split = connected_components(c4.remove_edges(cut).kept());
  EXPECT_EQ(split, (std::vector<std::vector<Vertex>>{{0, 1}, {2, 3}}));
  EXPECT_EQ(connected_components(path_graph(4)), (std::vector<std::vector<Vertex>>{{0, 1, 2, 3}}));
  EXPECT_EQ(connected_components(Graph::from_edge_list(3, {})),
            (std::vector<std::vector<Vertex>>{{0}, {1}, {2}}));
}

TEST(FeasibleSubgraphTest, RemoveMiddleEdgeOfP4) {
  const FeasibleSubgraph p4(path_graph(4));
  const std::vector<Edge> cut = {{1, 2}};
  const FeasibleSubgraph split = p4.remove_edges(cut);
  for (Vertex v = 0; v < 4; ++v) EXPECT_EQ(split.degree(v), 1);
  EXPECT_EQ(connected_components(split.kept()).size(), 2u);
  EXPECT_EQ(split.deleted_edges(), cut);
}

TEST(FeasibleSubgraphTest, RemovalThatIsolatesThrows) {
  const FeasibleSubgraph p3(path_graph(3));
  const std::vector<Edge> cut = {{0, 1}};
  EXPECT_THROW(p3.remove_edges(cut), ValidationError);
}

TEST(FeasibleSubgraphTest, RemovingAbsentEdgeThrows) {
  const FeasibleSubgraph c4(cycle_graph(4));
  const std::vector<Edge> cut = {{0, 2}};
  EXPECT_THROW(c4.remove_edges(cut), ValidationError);
}

TEST(FeasibleSubgraphTest, RejectsIsolatedVertexAndForeignEdges) {
  EXPECT_THROW(FeasibleSubgraph(Graph::from_edge_list(3, std::vector<Edge>{{0, 1}})), ValidationError);
  auto base = std::make_shared<const Graph>(path_graph(3));
  const std::vector<Edge> foreign = {{0, 2}, {1, 2}};
  EXPECT_THROW(FeasibleSubgraph(base, Graph::from_edge_list(3, foreign)), ValidationError);
}

TEST(FeasibleSubgraphTest, RemovalNeverRaisesDegreesAndStaysInsideBase) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const FeasibleSubgraph g(lattice_graph(4, 5));
    const Graph sub = testing::random_feasible_subgraph(g.base(), 0.5, rng);
    std::vector<Edge> removed;
    for (const Edge& e : g.base().edges()) {
      if (!sub.has_edge(e.u, e.v)) removed.push_back(e);
    }
    const FeasibleSubgraph h = g.remove_edges(removed);
    for (Vertex v = 0; v < h.vertex_count(); ++v) {
      EXPECT_LE(h.degree(v), g.degree(v));
      EXPECT_GE(h.degree(v), 1);
    }
    for (const Edge& e : h.kept().edges()) EXPECT_TRUE(h.base().has_edge(e.u, e.v));
    EXPECT_EQ(h.deleted_edges(), removed);
  }
}

}  // namespace
}  // namespace spnb
