#include "spnb/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace spnb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kCacheTolerance = 1e-9;

void check_inputs(const Graph& g, const ResidualSurface& phi) {
  if (static_cast<std::size_t>(g.vertex_count()) != phi.size()) {
    throw ValidationError("residual surface has " + std::to_string(phi.size()) +
                          " entries but the graph has " + std::to_string(g.vertex_count()) +
                          " vertices");
  }
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (g.degree(v) == 0) {
      throw ValidationError("input graph has isolated vertex " + std::to_string(v));
    }
  }
}

// Mutable working copy of the graph with cached neighbour sums and the
// weighted discrepancy sum. Confined to one local_search call.
class SearchState {
 public:
  SearchState(const Graph& g, const ResidualSurface& phi)
      : phi_(&phi), adjacency_(static_cast<std::size_t>(g.vertex_count())),
        neighbour_sum_(adjacency_.size(), 0.0), degree_(adjacency_.size(), 0),
        term_(adjacency_.size(), 0.0) {
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      const auto nbrs = g.neighbours(v);
      adjacency_[v].assign(nbrs.begin(), nbrs.end());
      degree_[v] = static_cast<int>(nbrs.size());
      for (Vertex u : nbrs) neighbour_sum_[v] += phi[u];
      term_[v] = degree_[v] * discrepancy(v);
    }
    total_ = full_total();
  }

  int vertex_count() const { return static_cast<int>(adjacency_.size()); }
  int degree(Vertex v) const { return degree_[v]; }
  std::span<const int> degrees() const { return degree_; }
  const std::vector<Vertex>& neighbours(Vertex v) const { return adjacency_[v]; }
  double neighbour_sum(Vertex v) const { return neighbour_sum_[v]; }
  double cached_total() const { return total_; }
  double phi(Vertex v) const { return (*phi_)[v]; }

  double discrepancy(Vertex v) const {
    const double diff = phi(v) - neighbour_sum_[v] / degree_[v];
    return diff * diff;
  }

  double full_total() const {
    double s = 0.0;
    for (Vertex v = 0; v < vertex_count(); ++v) {
      double sum = 0.0;
      for (Vertex u : adjacency_[v]) sum += phi(u);
      const double diff = phi(v) - sum / static_cast<double>(adjacency_[v].size());
      s += adjacency_[v].size() * (diff * diff);
    }
    return s;
  }

  void resync_total() { total_ = full_total(); }

  void remove_edge(Vertex a, Vertex b) {
    erase_neighbour(a, b);
    erase_neighbour(b, a);
    const double before = term_[a] + term_[b];
    term_[a] = degree_[a] * discrepancy(a);
    term_[b] = degree_[b] * discrepancy(b);
    total_ += term_[a] + term_[b] - before;
  }

  Graph to_graph() const {
    std::vector<Edge> edges;
    for (Vertex v = 0; v < vertex_count(); ++v) {
      for (Vertex u : adjacency_[v]) {
        if (v < u) edges.push_back({v, u});
      }
    }
    return Graph::from_edge_list(vertex_count(), edges);
  }

 private:
  void erase_neighbour(Vertex v, Vertex u) {
    auto& nbrs = adjacency_[v];
    const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), u);
    nbrs.erase(it);
    --degree_[v];
    // Re-summed rather than decremented so ND carries no subtraction error.
    double sum = 0.0;
    for (Vertex w : nbrs) sum += phi(w);
    neighbour_sum_[v] = sum;
  }

  const ResidualSurface* phi_;
  std::vector<std::vector<Vertex>> adjacency_;
  std::vector<double> neighbour_sum_;
  std::vector<int> degree_;
  std::vector<double> term_;
  double total_ = 0.0;
};

// Best adjusted contribution at one vertex, split by whether each candidate
// neighbour's edge is kept (with) or deleted (without).
struct SubsetScores {
  std::vector<Vertex> candidates;
  std::vector<double> with;
  std::vector<double> without;

  std::size_t index_of(Vertex u) const {
    return static_cast<std::size_t>(
        std::lower_bound(candidates.begin(), candidates.end(), u) - candidates.begin());
  }
};

struct VertexView {
  double phi = 0.0;
  int degree = 0;
  double neighbour_sum = 0.0;
};

SubsetScores score_subsets(const VertexView& x, std::vector<Vertex> candidates,
                           const std::vector<double>& candidate_phi, double reference_sum,
                           int vertex_count, int degree_cap, DegreeCapPolicy policy) {
  const std::size_t m = candidates.size();
  SubsetScores out{std::move(candidates), std::vector<double>(m, kNegInf),
                   std::vector<double>(m, kNegInf)};
  const bool exact = static_cast<int>(m) <= degree_cap;
  if (!exact && policy == DegreeCapPolicy::error) {
    throw DegreeCapExceeded("vertex has " + std::to_string(m) +
                            " deletable neighbours, above the degree cap of " +
                            std::to_string(degree_cap));
  }

  auto evaluate = [&](std::uint64_t mask) {
    const int removed = std::popcount(mask);
    const int new_degree = x.degree - removed;
    if (new_degree <= 0) return;
    double removed_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1U) removed_sum += candidate_phi[i];
    }
    const double diff = x.phi - (x.neighbour_sum - removed_sum) / new_degree;
    const double score =
        adjusted_contribution_from_terms(new_degree, diff * diff, reference_sum, vertex_count);
    for (std::size_t i = 0; i < m; ++i) {
      double& slot = (mask >> i & 1U) ? out.without[i] : out.with[i];
      slot = std::max(slot, score);
    }
  };

  if (exact) {
    const std::uint64_t count = std::uint64_t{1} << m;
    for (std::uint64_t mask = 0; mask < count; ++mask) evaluate(mask);
  } else {
    evaluate(0);
    for (std::size_t i = 0; i < m; ++i) evaluate(std::uint64_t{1} << i);
  }
  return out;
}

SubsetScores score_vertex(const SearchState& state, Vertex x, const std::vector<bool>& feasible,
                          const SearchConfig& cfg) {
  std::vector<Vertex> candidates;
  std::vector<double> candidate_phi;
  for (Vertex w : state.neighbours(x)) {
    if (feasible[w]) {
      candidates.push_back(w);
      candidate_phi.push_back(state.phi(w));
    }
  }
  const VertexView view{state.phi(x), state.degree(x), state.neighbour_sum(x)};
  return score_subsets(view, std::move(candidates), candidate_phi, state.cached_total(),
                       state.vertex_count(), cfg.degree_cap, cfg.on_degree_cap);
}

double objective_of(const SearchState& state, const ResidualSurface& phi) {
  return objective(state.to_graph(), phi).value;
}

}  // namespace

void SearchConfig::validate() const {
  if (max_passes < 1) throw ValidationError("max_passes must be at least 1");
  if (degree_cap < 1) throw ValidationError("degree_cap must be at least 1");
  if (degree_cap > 62) throw ValidationError("degree_cap above 62 is not supported");
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::no_improvement:
      return "no_improvement";
    case Termination::pass_cap:
      return "pass_cap";
  }
  return "unknown";
}

double best_subset_score(Vertex v, Vertex u, bool include_u, const Graph& h, const Graph& href,
                         const ResidualSurface& phi, const std::vector<bool>& feasible,
                         int degree_cap) {
  if (static_cast<std::size_t>(h.vertex_count()) != phi.size() ||
      href.vertex_count() != h.vertex_count() ||
      feasible.size() != static_cast<std::size_t>(h.vertex_count())) {
    throw ValidationError("graph, reference graph, surface and feasible set sizes differ");
  }
  if (!h.has_edge(v, u)) throw ValidationError("u is not a neighbour of v");
  if (!feasible[u]) throw ValidationError("u is not in the feasible set");

  std::vector<Vertex> candidates;
  std::vector<double> candidate_phi;
  double neighbour_sum = 0.0;
  for (Vertex w : h.neighbours(v)) {
    neighbour_sum += phi[w];
    if (feasible[w]) {
      candidates.push_back(w);
      candidate_phi.push_back(phi[w]);
    }
  }
  const VertexView view{phi[v], h.degree(v), neighbour_sum};
  const auto scores = score_subsets(view, std::move(candidates), candidate_phi,
                                    weighted_discrepancy_sum(href, phi), h.vertex_count(),
                                    degree_cap, DegreeCapPolicy::error);
  const std::size_t i = scores.index_of(u);
  return include_u ? scores.with[i] : scores.without[i];
}

SearchResult local_search(const Graph& g, const ResidualSurface& phi, const SearchConfig& cfg,
                          const SearchObserver& observer) {
  cfg.validate();
  check_inputs(g, phi);

  const int k = g.vertex_count();
  SearchState state(g, phi);
  SearchTrace trace;
  double score = objective(g, phi).value;
  trace.pass_objectives.push_back(score);

  while (true) {
    if (trace.passes == cfg.max_passes) {
      trace.terminated_by = Termination::pass_cap;
      break;
    }
    const SearchState pass_start = state;
    const std::size_t deletions_before = trace.deleted_edges.size();
    ++trace.passes;

    std::vector<bool> feasible(static_cast<std::size_t>(k));
    std::vector<Vertex> order;
    for (Vertex v = 0; v < k; ++v) {
      feasible[v] = state.degree(v) > 1;
      if (feasible[v]) order.push_back(v);
    }

    for (Vertex v : order) {
      if (!feasible[v]) continue;
      std::optional<SubsetScores> at_v;
      const std::vector<Vertex> snapshot = state.neighbours(v);
      for (Vertex u : snapshot) {
        if (!feasible[v]) break;
        if (!feasible[u]) continue;
        if (!at_v) at_v = score_vertex(state, v, feasible, cfg);
        const SubsetScores at_u = score_vertex(state, u, feasible, cfg);
        const std::size_t iu = at_v->index_of(u);
        const std::size_t iv = at_u.index_of(v);
        const double keep = at_v->with[iu] + at_u.with[iv];
        const double drop = at_v->without[iu] + at_u.without[iv];
        if (keep < drop && std::min(state.degree(v), state.degree(u)) > 1) {
          state.remove_edge(v, u);
          at_v.reset();
          const Edge e = make_edge(v, u);
          trace.deleted_edges.push_back(e);
          if (state.degree(u) == 1) feasible[u] = false;
          if (state.degree(v) == 1) feasible[v] = false;
          if (state.degree(u) < 1 || state.degree(v) < 1) {
            throw std::logic_error("local search isolated a vertex");
          }
          if (observer) observer(SearchEvent{trace.passes, e, state.degrees(), state.cached_total()});
        }
      }
    }

    const double full = state.full_total();
    if (std::abs(full - state.cached_total()) > kCacheTolerance * std::max(1.0, std::abs(full))) {
      throw NumericalError("cached discrepancy sum drifted from full recomputation");
    }
    state.resync_total();

    const double next = objective_of(state, phi);
    if (next > score) {
      score = next;
      trace.pass_objectives.push_back(score);
      continue;
    }
    trace.rejected_pass_objective = next;
    trace.rolled_back_deletions = trace.deleted_edges.size() - deletions_before;
    trace.deleted_edges.resize(deletions_before);
    state = pass_start;
    trace.terminated_by = Termination::no_improvement;
    break;
  }

  auto base = std::make_shared<const Graph>(g);
  return SearchResult{FeasibleSubgraph(std::move(base), state.to_graph()), std::move(trace)};
}

OracleResult brute_force_optimum(const Graph& g, const ResidualSurface& phi, int edge_cap) {
  check_inputs(g, phi);
  const std::vector<Edge> edges = g.edges();
  const std::size_t m = edges.size();
  if (static_cast<int>(m) > edge_cap || m > 62) {
    throw ValidationError("graph has " + std::to_string(m) + " edges, above the oracle cap of " +
                          std::to_string(edge_cap));
  }
  const int k = g.vertex_count();
  std::vector<int> degree(static_cast<std::size_t>(k));
  std::vector<double> neighbour_sum(static_cast<std::size_t>(k));

  // Accumulation order matches objective(): each vertex sums its neighbours
  // in ascending index order, so values are bit-identical.
  auto evaluate = [&](std::uint64_t mask) -> std::optional<double> {
    std::fill(degree.begin(), degree.end(), 0);
    std::fill(neighbour_sum.begin(), neighbour_sum.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (!(mask >> i & 1U)) continue;
      const Edge& e = edges[i];
      ++degree[e.u];
      ++degree[e.v];
      neighbour_sum[e.u] += phi[e.v];
      neighbour_sum[e.v] += phi[e.u];
    }
    double half_log = 0.0;
    double s = 0.0;
    for (Vertex v = 0; v < k; ++v) {
      if (degree[v] == 0) return std::nullopt;
      const double diff = phi[v] - neighbour_sum[v] / static_cast<double>(degree[v]);
      s += degree[v] * (diff * diff);
    }
    for (Vertex v = 0; v < k; ++v) half_log += std::log(static_cast<double>(degree[v]));
    return 0.5 * half_log - 0.5 * k * std::log(std::max(s, kDiscrepancyFloor));
  };

  auto kept_indices = [&](std::uint64_t mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1U) idx.push_back(i);
    }
    return idx;
  };

  std::optional<std::uint64_t> best_mask;
  double best_value = kNegInf;
  const std::uint64_t count = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const auto value = evaluate(mask);
    if (!value) continue;
    bool better = !best_mask || *value > best_value;
    if (!better && *value == best_value) {
      const int pc = std::popcount(mask);
      const int best_pc = std::popcount(*best_mask);
      better = pc > best_pc || (pc == best_pc && kept_indices(mask) < kept_indices(*best_mask));
    }
    if (better) {
      best_mask = mask;
      best_value = *value;
    }
  }

  std::vector<Edge> kept;
  for (std::size_t i : kept_indices(*best_mask)) kept.push_back(edges[i]);
  auto base = std::make_shared<const Graph>(g);
  FeasibleSubgraph result(std::move(base), Graph::from_edge_list(k, kept));
  const ObjectiveValue value = objective(result, phi);
  return OracleResult{std::move(result), value};
}

}  // namespace spnb
