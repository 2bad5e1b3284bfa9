#include "spnb/car_eval.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/SparseCholesky>

#include "spnb/errors.hpp"
#include "spnb/residuals.hpp"

namespace spnb {

Eigen::SparseMatrix<double> leroux_precision(const Graph& g, const CarHyperparams& hp) {
  hp.validate();
  const int k = g.vertex_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(k) + 2 * g.edge_count());
  for (Vertex v = 0; v < k; ++v) {
    triplets.emplace_back(v, v, hp.tau * (hp.rho * g.degree(v) + 1.0 - hp.rho));
    for (Vertex u : g.neighbours(v)) triplets.emplace_back(v, u, -hp.tau * hp.rho);
  }
  Eigen::SparseMatrix<double> q(k, k);
  q.setFromTriplets(triplets.begin(), triplets.end());
  return q;
}

SmootherGrid SmootherGrid::defaults() {
  SmootherGrid grid;
  for (int i = 0; i <= 9; ++i) grid.rho_values.push_back(0.1 * i);
  grid.rho_values.push_back(0.99);
  constexpr int kTauPoints = 25;
  const double lo = std::log10(0.1);
  const double hi = std::log10(1000.0);
  for (int i = 0; i < kTauPoints; ++i) {
    grid.tau_values.push_back(std::pow(10.0, lo + (hi - lo) * i / (kTauPoints - 1)));
  }
  return grid;
}

void SmootherGrid::validate() const {
  if (rho_values.empty() || tau_values.empty()) throw ValidationError("smoother grid must be nonempty");
  for (double rho : rho_values) {
    if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("smoother grid rho values must lie in [0,1)");
  }
  for (double tau : tau_values) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("smoother grid tau values must be positive");
  }
  if (obs_sd && !(*obs_sd > 0.0 && std::isfinite(*obs_sd))) {
    throw ValidationError("fixed obs_sd must be positive");
  }
}

namespace {

using SparseLdlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

double log_determinant(const SparseLdlt& ldlt) {
  const auto d = ldlt.vectorD();
  if ((d.array() <= 0.0).any()) throw NumericalError("precision matrix is not positive definite");
  return d.array().log().sum();
}

Eigen::SparseMatrix<double> shifted(const Eigen::SparseMatrix<double>& structure, double tau, double shift) {
  Eigen::SparseMatrix<double> p = tau * structure;
  for (Eigen::Index i = 0; i < p.rows(); ++i) p.coeffRef(i, i) += shift;
  return p;
}

double estimate_obs_sd(const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  if (y.size() < 2) return 0.01;
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / (n - 1.0);
  return std::max(0.5 * std::sqrt(var), 0.01);
}

struct GridEvaluator {
  const Graph& graph;
  std::vector<Eigen::SparseMatrix<double>> structures;  // R(rho), tau = 1
  std::vector<double> structure_logdets;
  SparseLdlt ldlt;

  GridEvaluator(const Graph& g, const std::vector<double>& rhos) : graph(g) {
    for (double rho : rhos) {
      structures.push_back(leroux_precision(g, CarHyperparams{rho, 1.0}));
      SparseLdlt f(structures.back());
      if (f.info() != Eigen::Success) throw NumericalError("CAR structure matrix factorisation failed");
      structure_logdets.push_back(log_determinant(f));
    }
    ldlt.analyzePattern(structures.front());
  }

  double log_marginal(std::size_t rho_index, double tau, double obs_sd, const Eigen::VectorXd& y) {
    const double k = static_cast<double>(y.size());
    const double s2 = obs_sd * obs_sd;
    ldlt.factorize(shifted(structures[rho_index], tau, 1.0 / s2));
    if (ldlt.info() != Eigen::Success) throw NumericalError("posterior precision factorisation failed");
    const double logdet_p = log_determinant(ldlt);
    const double logdet_q = k * std::log(tau) + structure_logdets[rho_index];
    const double logdet_sigma = logdet_p - logdet_q + k * std::log(s2);
    const Eigen::VectorXd v = ldlt.solve(y);
    const double quad = y.squaredNorm() / s2 - y.dot(v) / (s2 * s2);
    return -0.5 * (k * std::log(2.0 * std::numbers::pi) + logdet_sigma + quad);
  }
};

}  // namespace

double car_log_marginal(const Graph& g, const CarHyperparams& hp, double obs_sd, const Eigen::VectorXd& y) {
  hp.validate();
  if (!(hp.rho < 1.0)) throw ValidationError("marginal likelihood needs rho < 1");
  if (!(obs_sd > 0.0)) throw ValidationError("obs_sd must be positive");
  if (y.size() != g.vertex_count()) throw ValidationError("data length differs from vertex count");
  GridEvaluator eval(g, {hp.rho});
  return eval.log_marginal(0, hp.tau, obs_sd, y);
}

SmoothResult smooth_residuals(const Graph& g, const Eigen::MatrixXd& residuals, const SmootherGrid& grid) {
  Eigen::VectorXd sd(residuals.cols());
  for (Eigen::Index t = 0; t < residuals.cols(); ++t) sd(t) = estimate_obs_sd(residuals.col(t));
  return smooth_residuals(g, residuals, grid, sd);
}

SmoothResult smooth_residuals(const Graph& g, const Eigen::MatrixXd& residuals, const SmootherGrid& grid,
                              const Eigen::VectorXd& period_obs_sd) {
  grid.validate();
  const int k = g.vertex_count();
  if (residuals.rows() != k) throw ValidationError("residual rows differ from vertex count");
  if (!residuals.allFinite()) throw ValidationError("residuals must be finite");
  if (g.min_degree() < 1) throw ValidationError("smoothing graph has an isolated vertex");
  if (period_obs_sd.size() != residuals.cols()) throw ValidationError("one obs_sd per period is required");
  if (!grid.obs_sd && !(period_obs_sd.array() > 0.0).all()) throw ValidationError("obs_sd must be positive");

  GridEvaluator eval(g, grid.rho_values);
  SmoothResult out{Eigen::MatrixXd(k, residuals.cols()), Eigen::MatrixXd(k, residuals.cols()), {}};
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(k, k);

  for (Eigen::Index t = 0; t < residuals.cols(); ++t) {
    const Eigen::VectorXd y = residuals.col(t);
    PeriodFit best;
    best.obs_sd = grid.obs_sd.value_or(period_obs_sd(t));
    best.log_marginal = -std::numeric_limits<double>::infinity();
    std::size_t best_rho = 0;
    for (std::size_t r = 0; r < grid.rho_values.size(); ++r) {
      for (double tau : grid.tau_values) {
        const double lm = eval.log_marginal(r, tau, best.obs_sd, y);
        if (lm > best.log_marginal) {
          best.log_marginal = lm;
          best.rho = grid.rho_values[r];
          best.tau = tau;
          best_rho = r;
        }
      }
    }
    const double s2 = best.obs_sd * best.obs_sd;
    eval.ldlt.factorize(shifted(eval.structures[best_rho], best.tau, 1.0 / s2));
    if (eval.ldlt.info() != Eigen::Success) throw NumericalError("posterior precision factorisation failed");
    out.mean.col(t) = eval.ldlt.solve(y) / s2;
    const Eigen::MatrixXd inverse = eval.ldlt.solve(identity);
    out.variance.col(t) = inverse.diagonal();
    out.fits.push_back(best);
  }
  return out;
}

Eigen::VectorXd poisson_obs_sd(const Eigen::MatrixXd& counts) {
  if (counts.rows() == 0) throw ValidationError("counts must have at least one unit");
  return (1.0 / counts.array().max(0.5)).colwise().mean().sqrt().transpose();
}

double EvalReport::cross_boundary_deleted_fraction() const {
  return cross_boundary_total > 0 ? static_cast<double>(cross_boundary_deleted) / cross_boundary_total : 0.0;
}

double EvalReport::within_region_deleted_fraction() const {
  return within_region_total > 0 ? static_cast<double>(within_region_deleted) / within_region_total : 0.0;
}

EdgeClassification classify_edges(const Graph& border, const FeasibleSubgraph& estimated,
                                  const std::vector<int>& region_label) {
  if (static_cast<int>(region_label.size()) != border.vertex_count() ||
      estimated.vertex_count() != border.vertex_count()) {
    throw ValidationError("graphs and region labels must cover the same units");
  }
  EdgeClassification c;
  for (const Edge& e : border.edges()) {
    const bool cross = region_label[e.u] != region_label[e.v];
    const bool deleted = !estimated.kept().has_edge(e.u, e.v);
    if (cross) {
      ++c.cross_boundary_total;
      c.cross_boundary_deleted += deleted;
    } else {
      ++c.within_region_total;
      c.within_region_deleted += deleted;
    }
  }
  return c;
}

namespace {

constexpr double kZ975 = 1.959963984540054;

MethodMetrics score_method(const SimulatedPanel& sim, const GlmFit& fit, const Eigen::VectorXd& period_mean,
                           const SmoothResult& smooth) {
  const CountPanel& panel = sim.panel;
  const int k = panel.units();
  const int n = panel.periods();
  MethodMetrics m;
  m.phi_hat = smooth.mean;
  double sq = 0.0;
  double surface_sq = 0.0;
  double covered = 0.0;
  double width = 0.0;
  for (int t = 0; t < n; ++t) {
    const double truth_mean = sim.phi.col(t).mean();
    for (int i = 0; i < k; ++i) {
      const double eta = fit.linear_predictor(panel, i, t) + period_mean(t) + smooth.mean(i, t);
      const double sd = std::sqrt(smooth.variance(i, t));
      const double risk = std::exp(eta);
      const double lo = std::exp(eta - kZ975 * sd);
      const double hi = std::exp(eta + kZ975 * sd);
      const double truth = sim.theta(i, t);
      sq += (risk - truth) * (risk - truth);
      const double surface_err = smooth.mean(i, t) - (sim.phi(i, t) - truth_mean);
      surface_sq += surface_err * surface_err;
      covered += (truth >= lo && truth <= hi) ? 1.0 : 0.0;
      width += hi - lo;
    }
  }
  const double cells = static_cast<double>(k) * n;
  m.rmse = std::sqrt(sq / cells);
  m.surface_rmse = std::sqrt(surface_sq / cells);
  m.coverage = covered / cells;
  m.interval_width = width / cells;
  return m;
}

}  // namespace

EvalReport evaluate_replicate(const SimulatedPanel& sim, const Graph& w_border,
                              const FeasibleSubgraph& w_estimated, const SmootherGrid& grid) {
  const int k = sim.panel.units();
  if (w_border.vertex_count() != k || w_estimated.vertex_count() != k) {
    throw ValidationError("graphs must have one vertex per simulated unit");
  }
  const GlmFit fit = fit_poisson_glm(sim.panel);
  const Eigen::MatrixXd raw = raw_residuals(sim.panel, fit);
  const Eigen::VectorXd period_mean = raw.colwise().mean().transpose();
  const Eigen::MatrixXd centred = raw.rowwise() - period_mean.transpose();

  EvalReport report;
  const Eigen::VectorXd noise_sd = poisson_obs_sd(sim.panel.counts());
  report.border = score_method(sim, fit, period_mean, smooth_residuals(w_border, centred, grid, noise_sd));
  report.estimated =
      score_method(sim, fit, period_mean, smooth_residuals(w_estimated.kept(), centred, grid, noise_sd));
  report.rmse_w = report.border.rmse;
  report.rmse_we = report.estimated.rmse;
  report.reduction_pct = 100.0 * (report.rmse_w - report.rmse_we) / report.rmse_w;
  report.surface_reduction_pct =
      100.0 * (report.border.surface_rmse - report.estimated.surface_rmse) / report.border.surface_rmse;

  const EdgeClassification c = classify_edges(w_border, w_estimated, sim.region_label);
  report.cross_boundary_deleted = c.cross_boundary_deleted;
  report.within_region_deleted = c.within_region_deleted;
  report.cross_boundary_total = c.cross_boundary_total;
  report.within_region_total = c.within_region_total;
  return report;
}

}  // namespace spnb
