#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "spnb/datagen.hpp"
#include "spnb/errors.hpp"
#include "spnb/graph_io.hpp"
#include "spnb/panel_io.hpp"
#include "test_support.hpp"

namespace spnb {
namespace {

std::string io_error_message(const std::string& text) {
  std::istringstream in(text);
  try {
    read_graph_csv(in);
  } catch (const IoError& e) {
    return e.what();
  }
  return {};
}

TEST(GraphIoTest, EdgeListWithCommentsAndBlankLines) {
  std::istringstream in("# toy path\nu,v\n0,1\n\n1, 2\n2,3\n");
  EXPECT_EQ(read_graph_csv(in), testing::path_graph(4));
}

TEST(GraphIoTest, ExplicitVertexCountAddsIsolatedVertices) {
  std::istringstream in("u,v\n0,1\n");
  const Graph g = read_graph_csv(in, 4);
  EXPECT_EQ(g.vertex_count(), 4);
  EXPECT_EQ(g.degree(3), 0);
}

TEST(GraphIoTest, DenseMatrix) {
  std::istringstream in("0,1,0,1\n1,0,1,0\n0,1,0,1\n1,0,1,0\n");
  EXPECT_EQ(read_graph_csv(in), testing::cycle_graph(4));
}

TEST(GraphIoTest, ParseErrorsCarryLineNumbers) {
  EXPECT_NE(io_error_message("u,v\n0,1\n1,x\n").find("line 3"), std::string::npos);
  EXPECT_NE(io_error_message("u,v\n0,1\n\n1,2,3\n").find("line 4"), std::string::npos);
  EXPECT_NE(io_error_message("u,v\n2,2\n").find("line 2"), std::string::npos);
  EXPECT_NE(io_error_message("0,1\n1,2\n").find("line 2"), std::string::npos);
  EXPECT_NE(io_error_message("0,1\n0,0\n").find("symmetric"), std::string::npos);
  EXPECT_NE(io_error_message("0,1,0\n1,0,1\n").find("square"), std::string::npos);
  EXPECT_NE(io_error_message("").find("empty"), std::string::npos);
}

TEST(GraphIoTest, RoundTripBothFormats) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = testing::random_connected_planar(16, rng);
    std::ostringstream edges;
    write_edge_list_csv(edges, g.edges());
    std::istringstream edges_in(edges.str());
    EXPECT_EQ(read_graph_csv(edges_in, g.vertex_count()), g);
    std::ostringstream dense;
    write_dense_csv(dense, g);
    std::istringstream dense_in(dense.str());
    EXPECT_EQ(read_graph_csv(dense_in), g);
  }
}

TEST(GraphIoTest, EdgeListIsCanonicalAndSorted) {
  std::ostringstream out;
  const std::vector<Edge> edges = {{3, 1}, {0, 2}};
  write_edge_list_csv(out, edges);
  EXPECT_EQ(out.str(), "u,v\n0,2\n1,3\n");
}

TEST(PanelIoTest, RoundTripIsExact) {
  SimulationConfig cfg;
  cfg.rows = 3;
  cfg.cols = 4;
  cfg.periods = 3;
  const CountPanel panel = simulate_panel(cfg).panel;
  std::ostringstream out;
  write_panel_csv(out, panel);
  std::istringstream in(out.str());
  const CountPanel back = read_panel_csv(in);
  EXPECT_EQ(back.counts(), panel.counts());
  EXPECT_EQ(back.expected(), panel.expected());
  ASSERT_EQ(back.covariate_count(), 2);
  EXPECT_EQ(back.covariates()[1], panel.covariates()[1]);
}

TEST(PanelIoTest, RowOrderDoesNotMatter) {
  std::istringstream in("unit,time,y,expected\n1,0,4,2\n0,1,5,2.5\n0,0,3,1\n1,1,0,1\n");
  const CountPanel p = read_panel_csv(in);
  EXPECT_EQ(p.counts()(1, 0), 4.0);
  EXPECT_EQ(p.expected()(0, 1), 2.5);
  EXPECT_EQ(p.covariate_count(), 0);
}

TEST(PanelIoTest, RejectsMalformedPanels) {
  auto message = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      read_panel_csv(in);
    } catch (const IoError& e) {
      return e.what();
    }
    return {};
  };
  EXPECT_NE(message("unit,time,y\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("unit,time,y,expected\n0,0,1,1\n0,1,1\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("unit,time,y,expected\n0,0,1,1\n0,0,2,1\n1,1,1,1\n1,0,1,1\n").find("duplicate"),
            std::string::npos);
  EXPECT_NE(message("unit,time,y,expected\n0,0,1,1\n1,1,1,1\n").find("rows"), std::string::npos);
  EXPECT_NE(message("unit,time,y,expected\n0,0,1,0\n").find("invalid panel"), std::string::npos);
  EXPECT_NE(message("unit,time,y,expected,x2\n0,0,1,1,0\n").find("x1"), std::string::npos);
}

TEST(SurfaceIoTest, RoundTripAndOrdering) {
  std::mt19937_64 rng(89);
  const ResidualSurface s = testing::gaussian_surface(17, rng);
  std::ostringstream out;
  write_surface_csv(out, s);
  std::istringstream in(out.str());
  const ResidualSurface back = read_surface_csv(in);
  for (std::size_t i = 0; i < 17; ++i) EXPECT_EQ(back[i], s[i]);

  std::istringstream shuffled("unit,phi_tilde\n1,0.5\n0,0.1\n");
  EXPECT_THROW(read_surface_csv(shuffled), IoError);
  std::istringstream bad("unit,phi_tilde\n0,nan\n");
  EXPECT_THROW(read_surface_csv(bad), IoError);
}

TEST(IoTest, MissingFileIsIoError) {
  EXPECT_THROW(read_graph_csv(std::filesystem::path("/nonexistent/graph.csv")), IoError);
  EXPECT_THROW(read_panel_csv(std::filesystem::path("/nonexistent/panel.csv")), IoError);
}

}  // namespace
}  // namespace spnb
