#include "spnb/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spnb/errors.hpp"

namespace spnb {

ResidualSurface::ResidualSurface(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("residual surface entry " + std::to_string(i) + " is not finite");
    }
  }
}

void CarHyperparams::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in [0,1]");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive and finite");
}

namespace {

void check_sizes(const Graph& h, const ResidualSurface& phi) {
  if (static_cast<std::size_t>(h.vertex_count()) != phi.size()) {
    throw ValidationError("residual surface has " + std::to_string(phi.size()) +
                          " entries but the graph has " + std::to_string(h.vertex_count()) +
                          " vertices");
  }
}

double discrepancy_unchecked(const Graph& h, const ResidualSurface& phi, Vertex v) {
  const auto nbrs = h.neighbours(v);
  if (nbrs.empty()) {
    throw ValidationError("vertex " + std::to_string(v) + " has no neighbours");
  }
  double sum = 0.0;
  for (Vertex u : nbrs) sum += phi[u];
  const double diff = phi[v] - sum / static_cast<double>(nbrs.size());
  return diff * diff;
}

double half_log_degree_sum(const Graph& h) {
  double s = 0.0;
  for (Vertex v = 0; v < h.vertex_count(); ++v) s += std::log(static_cast<double>(h.degree(v)));
  return 0.5 * s;
}

}  // namespace

double neighbourhood_discrepancy(const Graph& h, const ResidualSurface& phi, Vertex v) {
  check_sizes(h, phi);
  return discrepancy_unchecked(h, phi, v);
}

double weighted_discrepancy_sum(const Graph& h, const ResidualSurface& phi) {
  check_sizes(h, phi);
  double s = 0.0;
  for (Vertex v = 0; v < h.vertex_count(); ++v) {
    s += h.degree(v) * discrepancy_unchecked(h, phi, v);
  }
  return s;
}

ObjectiveValue objective(const Graph& h, const ResidualSurface& phi) {
  ObjectiveValue out;
  out.discrepancy_sum = weighted_discrepancy_sum(h, phi);
  out.guarded = out.discrepancy_sum < kDiscrepancyFloor;
  const double k = h.vertex_count();
  out.value = half_log_degree_sum(h) - 0.5 * k * std::log(std::max(out.discrepancy_sum, kDiscrepancyFloor));
  return out;
}

double tau_mle(const Graph& h, const ResidualSurface& phi) {
  const double s = weighted_discrepancy_sum(h, phi);
  if (!(s > 0.0)) {
    throw NumericalError("tau MLE undefined: weighted discrepancy sum is zero");
  }
  return h.vertex_count() / s;
}

double conditional_log_likelihood(const Graph& h, const ResidualSurface& phi, double tau) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");
  const double s = weighted_discrepancy_sum(h, phi);
  return 0.5 * h.vertex_count() * std::log(tau) + half_log_degree_sum(h) - 0.5 * tau * s;
}

double contribution(Vertex v, const Graph& h, const ResidualSurface& phi) {
  check_sizes(h, phi);
  double rest = 0.0;
  for (Vertex w = 0; w < h.vertex_count(); ++w) {
    if (w != v) rest += h.degree(w) * discrepancy_unchecked(h, phi, w);
  }
  const int deg = h.degree(v);
  const double own = deg * discrepancy_unchecked(h, phi, v);
  const double k = h.vertex_count();
  return 0.5 * std::log(static_cast<double>(deg)) -
         0.5 * k * std::log1p(own / std::max(rest, kDiscrepancyFloor));
}

double contribution_unsimplified(Vertex v, const Graph& h, const ResidualSurface& phi) {
  check_sizes(h, phi);
  double total = 0.0;
  double rest = 0.0;
  for (Vertex w = 0; w < h.vertex_count(); ++w) {
    const double term = h.degree(w) * discrepancy_unchecked(h, phi, w);
    total += term;
    if (w != v) rest += term;
  }
  const double k = h.vertex_count();
  return 0.5 * std::log(static_cast<double>(h.degree(v))) -
         0.5 * k * std::log(std::max(total, kDiscrepancyFloor)) +
         0.5 * k * std::log(std::max(rest, kDiscrepancyFloor));
}

double adjusted_contribution_from_terms(int degree, double discrepancy, double reference_sum,
                                        int vertex_count) {
  const double own = degree * discrepancy;
  const double denom = std::max(reference_sum - own, kDiscrepancyFloor);
  return 0.5 * std::log(static_cast<double>(degree)) -
         0.5 * static_cast<double>(vertex_count) * std::log1p(own / denom);
}

double adjusted_contribution(Vertex v, const Graph& h, const Graph& href, const ResidualSurface& phi) {
  if (h.vertex_count() != href.vertex_count()) {
    throw ValidationError("graph and reference graph differ in vertex count");
  }
  const double reference_sum = weighted_discrepancy_sum(href, phi);
  return adjusted_contribution_from_terms(h.degree(v), neighbourhood_discrepancy(h, phi, v),
                                          reference_sum, h.vertex_count());
}

double partial_correlation(const Graph& g, const CarHyperparams& hp, Vertex k, Vertex j) {
  hp.validate();
  if (k == j) throw ValidationError("partial correlation needs two distinct vertices");
  if (!g.has_edge(k, j)) return 0.0;
  const double rho = hp.rho;
  const double dk = rho * g.degree(k) + 1.0 - rho;
  const double dj = rho * g.degree(j) + 1.0 - rho;
  return rho / std::sqrt(dk * dj);
}

}  // namespace spnb
