#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "spnb/graph.hpp"

namespace spnb {

/// Reads either an edge-list CSV (header `u,v`) or a dense K x K 0/1
/// adjacency CSV; the format is chosen from the first line. For edge lists
/// the vertex count is taken from `vertex_count` when given, otherwise it
/// is one more than the largest vertex seen. Throws IoError with the line
/// number on malformed input.
Graph read_graph_csv(std::istream& in, std::optional<int> vertex_count = std::nullopt);
Graph read_graph_csv(const std::filesystem::path& path, std::optional<int> vertex_count = std::nullopt);

/// Header `u,v`, one canonical edge (u < v) per row, sorted.
void write_edge_list_csv(std::ostream& out, std::span<const Edge> edges);
void write_edge_list_csv(const std::filesystem::path& path, std::span<const Edge> edges);
void write_edge_list_csv(const std::filesystem::path& path, const Graph& g);

void write_dense_csv(std::ostream& out, const Graph& g);

}  // namespace spnb
