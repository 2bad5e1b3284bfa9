#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spnb/datagen.hpp"
#include "spnb/graph.hpp"
#include "spnb/objective.hpp"

namespace spnb {

/// tau * [rho (diag(deg) - W) + (1 - rho) I] as a sparse symmetric matrix.
/// The sparsity pattern always includes the diagonal and every edge.
Eigen::SparseMatrix<double> leroux_precision(const Graph& g, const CarHyperparams& hp);

/// Hyperparameter grid for the Gaussian CAR smoother.
struct SmootherGrid {
  std::vector<double> rho_values;
  std::vector<double> tau_values;
  /// Fixed observation-noise sd; when unset it is estimated per period.
  std::optional<double> obs_sd;

  /// rho in {0, 0.1, ..., 0.9, 0.99}; 25 log-spaced tau values in [0.1, 1000].
  static SmootherGrid defaults();
  void validate() const;
};

struct PeriodFit {
  double rho = 0.0;
  double tau = 0.0;
  double obs_sd = 0.0;
  double log_marginal = 0.0;
};

struct SmoothResult {
  Eigen::MatrixXd mean;      ///< K x N posterior means
  Eigen::MatrixXd variance;  ///< K x N posterior marginal variances
  std::vector<PeriodFit> fits;
};

/// Gaussian log marginal likelihood of y under y = phi + noise,
/// phi ~ N(0, Q(rho, tau)^-1), noise ~ N(0, obs_sd^2 I). Requires rho < 1.
double car_log_marginal(const Graph& g, const CarHyperparams& hp, double obs_sd, const Eigen::VectorXd& y);

/// Per period, picks (rho, tau) on the grid maximising the Gaussian marginal
/// likelihood of that column and returns the posterior mean
/// (Q + I / s^2)^-1 y / s^2 and marginal variances. The graph must have no
/// isolated vertices; grid rho values must be below 1. Unless grid.obs_sd is
/// fixed, s is max(0.5 * sd(residuals_t), 0.01).
SmoothResult smooth_residuals(const Graph& g, const Eigen::MatrixXd& residuals, const SmootherGrid& grid);

/// As above with per-period noise sds used whenever grid.obs_sd is unset.
SmoothResult smooth_residuals(const Graph& g, const Eigen::MatrixXd& residuals, const SmootherGrid& grid,
                              const Eigen::VectorXd& period_obs_sd);

/// Per-period noise sd of log(Y / E) by the Poisson delta method:
/// sqrt(mean_i 1 / max(Y_it, 0.5)).
Eigen::VectorXd poisson_obs_sd(const Eigen::MatrixXd& counts);

struct MethodMetrics {
  double rmse = 0.0;          ///< RMSE of estimated risk against true risk
  double surface_rmse = 0.0;  ///< RMSE of smoothed surface against centred true surface
  double coverage = 0.0;      ///< share of true risks inside the 95% interval
  double interval_width = 0.0;
  Eigen::MatrixXd phi_hat;
};

struct EvalReport {
  MethodMetrics border;     ///< smoothing with the border-sharing graph W
  MethodMetrics estimated;  ///< smoothing with the estimated graph W_E
  double rmse_w = 0.0;
  double rmse_we = 0.0;
  double reduction_pct = 0.0;          ///< 100 (rmse_w - rmse_we) / rmse_w on risks
  double surface_reduction_pct = 0.0;  ///< same on smoothed surfaces
  int cross_boundary_deleted = 0;
  int within_region_deleted = 0;
  int cross_boundary_total = 0;
  int within_region_total = 0;

  double cross_boundary_deleted_fraction() const;
  double within_region_deleted_fraction() const;
};

struct EdgeClassification {
  int cross_boundary_deleted = 0;
  int within_region_deleted = 0;
  int cross_boundary_total = 0;
  int within_region_total = 0;
};

/// Splits the border graph's edges, and the estimated graph's deletions,
/// into cross-boundary (endpoint labels differ) and within-region.
EdgeClassification classify_edges(const Graph& border, const FeasibleSubgraph& estimated,
                                  const std::vector<int>& region_label);

/// Runs the residual pipeline on sim.panel, smooths the period-centred
/// residuals with both graphs using poisson_obs_sd noise unless grid.obs_sd
/// is fixed, and scores the resulting risk estimates
/// exp(x' beta_hat + period mean + phi_hat) against sim.theta.
EvalReport evaluate_replicate(const SimulatedPanel& sim, const Graph& w_border,
                              const FeasibleSubgraph& w_estimated, const SmootherGrid& grid);

}  // namespace spnb
