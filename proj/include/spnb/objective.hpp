#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spnb/graph.hpp"

namespace spnb {

/// Floor applied to the weighted discrepancy sum (and to the partial sums
/// used by the per-vertex contributions) before taking logarithms.
inline constexpr double kDiscrepancyFloor = 1e-12;

/// Temporally averaged log-rate residual per areal unit. All entries finite.
class ResidualSurface {
 public:
  ResidualSurface() = default;
  explicit ResidualSurface(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](Vertex v) const { return values_[static_cast<std::size_t>(v)]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

struct ObjectiveValue {
  double value = 0.0;
  /// sum_v deg(v) * ND(v), before the floor.
  double discrepancy_sum = 0.0;
  /// True when discrepancy_sum fell below kDiscrepancyFloor.
  bool guarded = false;
};

/// Leroux CAR parameters: rho in [0,1], tau > 0.
struct CarHyperparams {
  double rho = 1.0;
  double tau = 1.0;

  void validate() const;
};

/// Squared difference between phi_v and the mean of phi over v's neighbours.
/// Throws ValidationError if v is isolated in h.
double neighbourhood_discrepancy(const Graph& h, const ResidualSurface& phi, Vertex v);

/// sum_v deg(v) * ND(v). Requires every vertex of h to have degree >= 1.
double weighted_discrepancy_sum(const Graph& h, const ResidualSurface& phi);

/// Profiled pseudo-likelihood:
///   0.5 * sum_v ln deg(v) - (K/2) * ln(max(S, floor)),  S = weighted discrepancy sum.
ObjectiveValue objective(const Graph& h, const ResidualSurface& phi);
inline ObjectiveValue objective(const FeasibleSubgraph& h, const ResidualSurface& phi) {
  return objective(h.kept(), phi);
}

/// Closed-form maximiser of the tau-dependent pseudo-likelihood, K / S.
/// Throws NumericalError when S is zero.
double tau_mle(const Graph& h, const ResidualSurface& phi);

/// The pseudo-likelihood at a given precision tau, before profiling:
///   (K/2) ln tau + 0.5 * sum_v ln deg(v) - (tau/2) * S.
double conditional_log_likelihood(const Graph& h, const ResidualSurface& phi, double tau);

/// Per-vertex share of the objective:
///   0.5 ln deg(v) - (K/2) ln(1 + deg(v) ND(v) / sum_{w != v} deg(w) ND(w)).
double contribution(Vertex v, const Graph& h, const ResidualSurface& phi);

/// The same quantity written as three log terms, without simplification.
double contribution_unsimplified(Vertex v, const Graph& h, const ResidualSurface& phi);

/// Contribution of v in h with the global discrepancy taken from the
/// reference graph href: the denominator is S(href) - deg_h(v) ND_h(v).
double adjusted_contribution(Vertex v, const Graph& h, const Graph& href, const ResidualSurface& phi);

/// Core of adjusted_contribution given the pieces directly. `reference_sum`
/// is S(href); the denominator is floored at kDiscrepancyFloor.
double adjusted_contribution_from_terms(int degree, double discrepancy, double reference_sum,
                                        int vertex_count);

/// Partial correlation between units k and j implied by the Leroux CAR
/// prior: rho w_kj / sqrt((rho deg(k) + 1 - rho)(rho deg(j) + 1 - rho)).
double partial_correlation(const Graph& g, const CarHyperparams& hp, Vertex k, Vertex j);

}  // namespace spnb
