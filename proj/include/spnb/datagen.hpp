#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spnb/graph.hpp"
#include "spnb/residuals.hpp"

namespace spnb {

using Rng = std::mt19937_64;

/// Independent stream for replicate `replicate` of a run seeded with `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t replicate = 0);

/// Settings for one synthetic spatio-temporal scenario on a rows x cols lattice.
struct SimulationConfig {
  int rows = 10;
  int cols = 10;
  int periods = 9;
  std::vector<double> beta = {0.05, 0.05};
  std::array<double, 2> e_range = {150.0, 250.0};
  double lambda = 0.0;
  double alpha = 0.8;
  double cov_target_corr = 0.25;
  double phi_target_corr = 0.15;
  double cov_sd = 0.5;
  double phi_sd = 0.2;
  double phi_star_sd = 0.1;
  double delta_sd = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimulatedPanel {
  CountPanel panel;
  Eigen::MatrixXd phi;    ///< K x N latent surfaces phi_t = phi + phi*_t
  Eigen::VectorXd delta;  ///< length-N temporal trend
  Eigen::MatrixXd theta;  ///< K x N true risks
  std::vector<int> region_label;  ///< -1 / 0 / +1 step-change band per unit
  std::vector<std::array<double, 2>> centroids;  ///< (x = col, y = row)
  double xi_covariate = 0.0;
  double xi_phi = 0.0;
};

/// Pairwise Euclidean distances between points.
Eigen::MatrixXd distance_matrix(const std::vector<std::array<double, 2>>& points);

/// Lattice coordinates (col, row) for every unit of a rows x cols grid.
std::vector<std::array<double, 2>> lattice_centroids(int rows, int cols);

/// exp(-xi * D) elementwise. D must be symmetric, nonnegative, zero diagonal.
Eigen::MatrixXd exponential_correlation(const Eigen::MatrixXd& distances, double xi);

/// Mean of the off-diagonal entries of exp(-xi * D).
double mean_offdiagonal_correlation(const Eigen::MatrixXd& distances, double xi);

/// Decay rate xi at which the mean off-diagonal correlation equals target,
/// by bisection to 1e-8 in correlation (upper bracket doubled until it holds).
double calibrate_range(const Eigen::MatrixXd& distances, double target);

/// Cholesky-based sampler for N(mean, sigma). A 1e-10 diagonal jitter is
/// tried if the plain factorisation fails; ValidationError if that fails too.
class MvnSampler {
 public:
  explicit MvnSampler(const Eigen::MatrixXd& sigma);

  Eigen::VectorXd draw(const Eigen::VectorXd& mean, Rng& rng) const;
  Eigen::Index dimension() const noexcept { return lower_.rows(); }

 private:
  Eigen::MatrixXd lower_;
};

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& sigma, Rng& rng);

struct StepChange {
  Eigen::VectorXd mean;
  std::vector<int> region_label;
};

/// Three vertical bands of columns (left to right -lambda, 0, +lambda);
/// column c goes to band floor(3c / cols).
StepChange step_change_mean(int rows, int cols, double lambda);

/// Stationary AR(1) path: x_1 ~ N(0, sd^2), x_t = alpha x_{t-1} + N(0, sd^2 (1 - alpha^2)).
Eigen::VectorXd simulate_ar1(int length, double alpha, double marginal_sd, Rng& rng);

/// One replicate of the scenario; the random stream is make_rng(cfg.seed, replicate).
SimulatedPanel simulate_panel(const SimulationConfig& cfg, std::uint64_t replicate = 0);

}  // namespace spnb
