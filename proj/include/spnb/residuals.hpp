#pragma once

#include <vector>

#include <Eigen/Dense>

#include "spnb/objective.hpp"

namespace spnb {

/// Counts, expected counts and covariates for K units over N periods.
///
/// `counts` holds nonnegative integers stored as doubles; `expected` is
/// strictly positive; `covariates[j]` is the K x N matrix of covariate j.
class CountPanel {
 public:
  CountPanel(Eigen::MatrixXd counts, Eigen::MatrixXd expected, std::vector<Eigen::MatrixXd> covariates);

  int units() const noexcept { return static_cast<int>(counts_.rows()); }
  int periods() const noexcept { return static_cast<int>(counts_.cols()); }
  int covariate_count() const noexcept { return static_cast<int>(covariates_.size()); }

  const Eigen::MatrixXd& counts() const noexcept { return counts_; }
  const Eigen::MatrixXd& expected() const noexcept { return expected_; }
  const std::vector<Eigen::MatrixXd>& covariates() const noexcept { return covariates_; }

 private:
  Eigen::MatrixXd counts_;
  Eigen::MatrixXd expected_;
  std::vector<Eigen::MatrixXd> covariates_;
};

struct GlmOptions {
  bool intercept = true;
  int max_iterations = 100;
  double score_tolerance = 1e-8;
  double relative_loglik_tolerance = 1e-10;
};

struct GlmFit {
  /// Intercept first when fitted with one, then one coefficient per covariate.
  Eigen::VectorXd beta;
  bool intercept = true;
  bool converged = false;
  int iterations = 0;
  double deviance = 0.0;
  double max_abs_score = 0.0;

  /// Linear predictor x_kt' beta (intercept included) for one cell.
  double linear_predictor(const CountPanel& panel, int unit, int period) const;
};

/// Row-major (unit-major) design matrix of the pooled K*N observations:
/// row k * N + t. Includes the intercept column when requested.
Eigen::MatrixXd design_matrix(const CountPanel& panel, bool intercept);

/// Poisson log-likelihood up to the ln(y!) constant, with offset ln(e).
double poisson_log_likelihood(const CountPanel& panel, const Eigen::VectorXd& beta, bool intercept);

/// Poisson log-link regression of counts on covariates with offset ln(e),
/// pooling all K*N cells under independence, fitted by IRLS. Throws
/// ValidationError on a rank-deficient design and NumericalError if the
/// iteration cap is hit.
GlmFit fit_poisson_glm(const CountPanel& panel, const GlmOptions& options = {});

/// ln(Y/e) - x'beta per cell, with Y replaced by 0.5 where Y = 0.
Eigen::MatrixXd raw_residuals(const CountPanel& panel, const GlmFit& fit);

/// Row means of a K x N residual matrix.
ResidualSurface temporal_average(const Eigen::MatrixXd& residuals);

}  // namespace spnb
