#include "spnb/graph_io.hpp"

#include <algorithm>
#include <ostream>

#include "csv.hpp"

namespace spnb {

namespace {

Graph read_edge_list(csv::LineReader& reader, std::optional<int> vertex_count) {
  std::vector<Edge> edges;
  int max_vertex = -1;
  std::string line;
  while (reader.next(line)) {
    const auto fields = csv::split(line);
    if (fields.size() != 2) csv::fail(reader.line_no(), "expected 2 fields 'u,v'");
    const auto u = csv::parse_int(fields[0], reader.line_no());
    const auto v = csv::parse_int(fields[1], reader.line_no());
    if (u < 0 || v < 0) csv::fail(reader.line_no(), "negative vertex index");
    if (u == v) csv::fail(reader.line_no(), "self-loop at vertex " + std::to_string(u));
    if (vertex_count && (u >= *vertex_count || v >= *vertex_count)) {
      csv::fail(reader.line_no(), "vertex index exceeds vertex count " + std::to_string(*vertex_count));
    }
    max_vertex = std::max({max_vertex, static_cast<int>(u), static_cast<int>(v)});
    edges.push_back(make_edge(static_cast<Vertex>(u), static_cast<Vertex>(v)));
  }
  const int k = vertex_count.value_or(max_vertex + 1);
  return Graph::from_edge_list(k, edges);
}

Graph read_dense(csv::LineReader& reader, std::string first, std::optional<int> vertex_count) {
  std::vector<std::vector<int>> rows;
  std::string line = std::move(first);
  do {
    const auto fields = csv::split(line);
    std::vector<int> row;
    row.reserve(fields.size());
    for (auto f : fields) {
      const auto x = csv::parse_int(f, reader.line_no());
      if (x != 0 && x != 1) csv::fail(reader.line_no(), "dense adjacency entries must be 0 or 1");
      row.push_back(static_cast<int>(x));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      csv::fail(reader.line_no(), "ragged dense adjacency row");
    }
    rows.push_back(std::move(row));
  } while (reader.next(line));

  const int k = static_cast<int>(rows.size());
  if (static_cast<int>(rows.front().size()) != k) {
    throw IoError("dense adjacency must be square, got " + std::to_string(k) + " x " +
                  std::to_string(rows.front().size()));
  }
  if (vertex_count && *vertex_count != k) {
    throw IoError("dense adjacency has " + std::to_string(k) + " rows, expected " +
                  std::to_string(*vertex_count));
  }
  std::vector<Edge> edges;
  for (int i = 0; i < k; ++i) {
    if (rows[i][i] != 0) throw IoError("dense adjacency has a nonzero diagonal at row " + std::to_string(i));
    for (int j = i + 1; j < k; ++j) {
      if (rows[i][j] != rows[j][i]) {
        throw IoError("dense adjacency is not symmetric at (" + std::to_string(i) + "," +
                      std::to_string(j) + ")");
      }
      if (rows[i][j] == 1) edges.push_back({i, j});
    }
  }
  return Graph::from_edge_list(k, edges);
}

}  // namespace

Graph read_graph_csv(std::istream& in, std::optional<int> vertex_count) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw IoError("empty graph file");
  const auto fields = csv::split(line);
  if (fields.size() == 2 && fields[0] == "u" && fields[1] == "v") {
    return read_edge_list(reader, vertex_count);
  }
  return read_dense(reader, std::move(line), vertex_count);
}

Graph read_graph_csv(const std::filesystem::path& path, std::optional<int> vertex_count) {
  auto in = csv::open_input(path);
  try {
    return read_graph_csv(in, vertex_count);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_edge_list_csv(std::ostream& out, std::span<const Edge> edges) {
  std::vector<Edge> sorted;
  sorted.reserve(edges.size());
  for (const Edge& e : edges) sorted.push_back(make_edge(e.u, e.v));
  std::sort(sorted.begin(), sorted.end());
  out << "u,v\n";
  for (const Edge& e : sorted) out << e.u << ',' << e.v << '\n';
}

void write_edge_list_csv(const std::filesystem::path& path, std::span<const Edge> edges) {
  auto out = csv::open_output(path);
  write_edge_list_csv(out, edges);
}

void write_edge_list_csv(const std::filesystem::path& path, const Graph& g) {
  write_edge_list_csv(path, g.edges());
}

void write_dense_csv(std::ostream& out, const Graph& g) {
  const int k = g.vertex_count();
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (j > 0) out << ',';
      out << (g.has_edge(i, j) ? 1 : 0);
    }
    out << '\n';
  }
}

}  // namespace spnb
