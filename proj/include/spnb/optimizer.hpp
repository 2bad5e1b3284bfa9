#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spnb/errors.hpp"
#include "spnb/graph.hpp"
#include "spnb/objective.hpp"

namespace spnb {

enum class VertexOrder { ascending_index };

/// What local_search does when a vertex has more deletable neighbours than
/// SearchConfig::degree_cap allows for exact subset enumeration.
enum class DegreeCapPolicy {
  error,           ///< throw DegreeCapExceeded
  greedy_fallback  ///< only consider single-edge deletions at that vertex
};

struct SearchConfig {
  int max_passes = 1000;
  int degree_cap = 25;
  VertexOrder vertex_order = VertexOrder::ascending_index;
  DegreeCapPolicy on_degree_cap = DegreeCapPolicy::error;

  void validate() const;
};

enum class Termination { no_improvement, pass_cap };

std::string_view to_string(Termination t) noexcept;

struct SearchTrace {
  /// Objective of the input graph followed by the objective after every
  /// accepted pass. Strictly increasing.
  std::vector<double> pass_objectives;
  /// Objective reached by the final pass, which did not improve on the last
  /// accepted value and was rolled back. Unset when stopped by the pass cap.
  std::optional<double> rejected_pass_objective;
  /// Edges deleted in the returned graph, in deletion order.
  std::vector<Edge> deleted_edges;
  /// Deletions made by the rolled-back final pass.
  std::size_t rolled_back_deletions = 0;
  /// Number of passes run, including the final non-improving one.
  int passes = 0;
  Termination terminated_by = Termination::no_improvement;
};

struct SearchResult {
  FeasibleSubgraph graph;
  SearchTrace trace;
};

/// Snapshot handed to a SearchObserver after every accepted deletion.
struct SearchEvent {
  int pass = 0;
  Edge deleted;
  std::span<const int> degrees;
  double cached_discrepancy_sum = 0.0;
};

using SearchObserver = std::function<void(const SearchEvent&)>;

class DegreeCapExceeded : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Best adjusted contribution at v over deletion sets N- drawn from the
/// neighbours of v in h that lie in `feasible`, where N- excludes u
/// (include_u = true: the edge uv is kept) or contains u (include_u = false).
/// Deletion sets that would isolate v are skipped. The reference graph for the
/// adjusted contribution is href. Returns -infinity if no set is admissible.
/// Throws DegreeCapExceeded when more than degree_cap neighbours are candidates.
double best_subset_score(Vertex v, Vertex u, bool include_u, const Graph& h, const Graph& href,
                         const ResidualSurface& phi, const std::vector<bool>& feasible,
                         int degree_cap = 25);

/// Iterative local search that deletes edges of g to increase the profiled
/// objective while keeping every vertex at degree >= 1.
///
/// Vertices are visited in ascending index order. For each feasible vertex v
/// and each feasible neighbour u, the edge uv is removed when the best
/// adjusted contributions at v and u without the edge beat those with it and
/// both endpoints still have degree > 1. Deletions take effect immediately.
/// Passes repeat until one fails to raise the objective; that final pass is
/// rolled back. Throws ValidationError if g has an isolated vertex or the
/// surface length differs from K.
SearchResult local_search(const Graph& g, const ResidualSurface& phi, const SearchConfig& cfg = {},
                          const SearchObserver& observer = {});

struct OracleResult {
  FeasibleSubgraph graph;
  ObjectiveValue objective;
};

/// Exhaustive search over all edge subsets of g. Ties go to the subgraph
/// with more kept edges, then to the lexicographically smallest kept set.
/// Throws ValidationError if g has more than edge_cap edges or is infeasible.
OracleResult brute_force_optimum(const Graph& g, const ResidualSurface& phi, int edge_cap = 20);

}  // namespace spnb
