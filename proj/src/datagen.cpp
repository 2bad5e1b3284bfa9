#include "spnb/datagen.hpp"

#include <cmath>
#include <string>

#include "spnb/errors.hpp"

namespace spnb {

Rng make_rng(std::uint64_t seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
  return Rng(seq);
}

void SimulationConfig::validate() const {
  if (rows < 1 || cols < 1) throw ValidationError("lattice dimensions must be positive");
  if (rows * cols < 2) throw ValidationError("simulation needs at least two units");
  if (periods < 1) throw ValidationError("periods must be at least 1");
  if (!(e_range[0] > 0.0) || !(e_range[1] >= e_range[0])) {
    throw ValidationError("e_range must be a positive interval [lo, hi]");
  }
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0,1)");
  for (double target : {cov_target_corr, phi_target_corr}) {
    if (!(target > 0.0 && target < 1.0)) throw ValidationError("correlation targets must lie in (0,1)");
  }
  for (double sd : {cov_sd, phi_sd, phi_star_sd, delta_sd}) {
    if (!(sd > 0.0) || !std::isfinite(sd)) throw ValidationError("standard deviations must be positive");
  }
  for (double b : beta) {
    if (!std::isfinite(b)) throw ValidationError("beta entries must be finite");
  }
}

Eigen::MatrixXd distance_matrix(const std::vector<std::array<double, 2>>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      d(i, j) = std::hypot(points[i][0] - points[j][0], points[i][1] - points[j][1]);
    }
  }
  return d;
}

std::vector<std::array<double, 2>> lattice_centroids(int rows, int cols) {
  std::vector<std::array<double, 2>> out;
  out.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back({static_cast<double>(c), static_cast<double>(r)});
  }
  return out;
}

namespace {

void check_distances(const Eigen::MatrixXd& d) {
  if (d.rows() != d.cols() || d.rows() < 1) throw ValidationError("distance matrix must be square");
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw ValidationError("distance matrix must have a zero diagonal");
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (!(d(i, j) >= 0.0) || !std::isfinite(d(i, j))) {
        throw ValidationError("distances must be finite and nonnegative");
      }
      if (d(i, j) != d(j, i)) throw ValidationError("distance matrix must be symmetric");
    }
  }
}

}  // namespace

Eigen::MatrixXd exponential_correlation(const Eigen::MatrixXd& distances, double xi) {
  check_distances(distances);
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw ValidationError("xi must be finite and nonnegative");
  return (-xi * distances.array()).exp().matrix();
}

double mean_offdiagonal_correlation(const Eigen::MatrixXd& distances, double xi) {
  const Eigen::Index n = distances.rows();
  if (n < 2) throw ValidationError("need at least two points for an off-diagonal mean");
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) s += std::exp(-xi * distances(i, j));
    }
  }
  return s / static_cast<double>(n * (n - 1));
}

double calibrate_range(const Eigen::MatrixXd& distances, double target) {
  check_distances(distances);
  if (!(target > 0.0 && target < 1.0)) {
    throw ValidationError("target mean correlation must lie in (0,1), got " + std::to_string(target));
  }
  if (distances.rows() < 2 || distances.maxCoeff() <= 0.0) {
    throw ValidationError("calibration needs at least one positive off-diagonal distance");
  }
  // Off-diagonal zeros (coincident points) put a floor under the mean.
  double floor = 0.0;
  const Eigen::Index n = distances.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && distances(i, j) == 0.0) floor += 1.0;
    }
  }
  floor /= static_cast<double>(n * (n - 1));
  if (target <= floor) throw ValidationError("target correlation unreachable with coincident points");

  double lo = 0.0;
  double hi = 1.0;
  while (mean_offdiagonal_correlation(distances, hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("could not bracket the correlation range");
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mean_offdiagonal_correlation(distances, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double xi = 0.5 * (lo + hi);
  if (std::abs(mean_offdiagonal_correlation(distances, xi) - target) > 1e-8) {
    throw NumericalError("range calibration did not reach the target correlation");
  }
  return xi;
}

MvnSampler::MvnSampler(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) throw ValidationError("covariance must be square");
  if (!sigma.allFinite()) throw ValidationError("covariance has non-finite entries");
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw ValidationError("covariance must be symmetric");
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
    if (!(sigma(i, i) > 0.0)) {
      throw ValidationError("covariance is not positive definite: zero variance in coordinate " +
                            std::to_string(i));
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-10 * sigma.diagonal().maxCoeff();
    Eigen::MatrixXd jittered = sigma;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() != Eigen::Success) {
      throw ValidationError("covariance is not positive definite after diagonal jitter");
    }
  }
  lower_ = llt.matrixL();
}

Eigen::VectorXd MvnSampler::draw(const Eigen::VectorXd& mean, Rng& rng) const {
  if (mean.size() != lower_.rows()) throw ValidationError("mean has the wrong dimension");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(lower_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return mean + lower_.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& sigma, Rng& rng) {
  return MvnSampler(sigma).draw(mean, rng);
}

StepChange step_change_mean(int rows, int cols, double lambda) {
  if (rows < 1 || cols < 1) throw ValidationError("lattice dimensions must be positive");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  StepChange out{Eigen::VectorXd(rows * cols), std::vector<int>(static_cast<std::size_t>(rows * cols))};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int band = 3 * c / cols;  // 0, 1, 2 from left to right
      const int label = band - 1;
      out.region_label[r * cols + c] = label;
      out.mean(r * cols + c) = label * lambda;
    }
  }
  return out;
}

Eigen::VectorXd simulate_ar1(int length, double alpha, double marginal_sd, Rng& rng) {
  if (length < 1) throw ValidationError("AR(1) length must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0,1)");
  if (!(marginal_sd > 0.0)) throw ValidationError("AR(1) standard deviation must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innovation_sd = marginal_sd * std::sqrt(1.0 - alpha * alpha);
  Eigen::VectorXd x(length);
  x(0) = marginal_sd * normal(rng);
  for (int t = 1; t < length; ++t) x(t) = alpha * x(t - 1) + innovation_sd * normal(rng);
  return x;
}

SimulatedPanel simulate_panel(const SimulationConfig& cfg, std::uint64_t replicate) {
  cfg.validate();
  const int k = cfg.rows * cfg.cols;
  const int n = cfg.periods;
  Rng rng = make_rng(cfg.seed, replicate);

  auto centroids = lattice_centroids(cfg.rows, cfg.cols);
  const Eigen::MatrixXd distances = distance_matrix(centroids);
  const double xi_cov = calibrate_range(distances, cfg.cov_target_corr);
  const double xi_phi = calibrate_range(distances, cfg.phi_target_corr);
  const MvnSampler cov_field(exponential_correlation(distances, xi_cov));
  const MvnSampler phi_field(exponential_correlation(distances, xi_phi));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(k);

  std::uniform_real_distribution<double> uniform_e(cfg.e_range[0], cfg.e_range[1]);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd expected(k, n);
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < k; ++i) expected(i, t) = uniform_e(rng);
  }

  // Covariate 1 is independent noise; the rest are spatially correlated.
  // Both are redrawn every period.
  std::vector<Eigen::MatrixXd> covariates(cfg.beta.size(), Eigen::MatrixXd(k, n));
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    for (int t = 0; t < n; ++t) {
      if (j == 0) {
        for (int i = 0; i < k; ++i) covariates[j](i, t) = cfg.cov_sd * normal(rng);
      } else {
        covariates[j].col(t) = cfg.cov_sd * cov_field.draw(zero, rng);
      }
    }
  }

  const StepChange step = step_change_mean(cfg.rows, cfg.cols, cfg.lambda);
  const Eigen::VectorXd phi_common = step.mean + cfg.phi_sd * phi_field.draw(zero, rng);
  Eigen::MatrixXd phi(k, n);
  for (int t = 0; t < n; ++t) phi.col(t) = phi_common + cfg.phi_star_sd * phi_field.draw(zero, rng);

  const Eigen::VectorXd delta = simulate_ar1(n, cfg.alpha, cfg.delta_sd, rng);

  Eigen::MatrixXd theta(k, n);
  Eigen::MatrixXd counts(k, n);
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < k; ++i) {
      double eta = 0.0;
      for (std::size_t j = 0; j < covariates.size(); ++j) eta += cfg.beta[j] * covariates[j](i, t);
      eta += phi(i, t) + delta(t);
      theta(i, t) = std::exp(eta);
      std::poisson_distribution<long long> poisson(expected(i, t) * theta(i, t));
      counts(i, t) = static_cast<double>(poisson(rng));
    }
  }

  return SimulatedPanel{CountPanel(std::move(counts), std::move(expected), std::move(covariates)),
                        std::move(phi),
                        delta,
                        std::move(theta),
                        step.region_label,
                        std::move(centroids),
                        xi_cov,
                        xi_phi};
}

}  // namespace spnb
