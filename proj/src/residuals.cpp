#include "spnb/residuals.hpp"

#include <cmath>
#include <string>

#include "spnb/errors.hpp"

namespace spnb {

CountPanel::CountPanel(Eigen::MatrixXd counts, Eigen::MatrixXd expected,
                       std::vector<Eigen::MatrixXd> covariates)
    : counts_(std::move(counts)), expected_(std::move(expected)), covariates_(std::move(covariates)) {
  if (counts_.rows() < 1 || counts_.cols() < 1) {
    throw ValidationError("count panel needs at least one unit and one period");
  }
  if (expected_.rows() != counts_.rows() || expected_.cols() != counts_.cols()) {
    throw ValidationError("expected counts and observed counts differ in shape");
  }
  for (std::size_t j = 0; j < covariates_.size(); ++j) {
    if (covariates_[j].rows() != counts_.rows() || covariates_[j].cols() != counts_.cols()) {
      throw ValidationError("covariate " + std::to_string(j + 1) + " differs in shape from the counts");
    }
    if (!covariates_[j].allFinite()) {
      throw ValidationError("covariate " + std::to_string(j + 1) + " has non-finite entries");
    }
  }
  for (Eigen::Index k = 0; k < counts_.rows(); ++k) {
    for (Eigen::Index t = 0; t < counts_.cols(); ++t) {
      const double y = counts_(k, t);
      if (!(y >= 0.0) || y != std::floor(y)) {
        throw ValidationError("count at unit " + std::to_string(k) + ", period " + std::to_string(t) +
                              " is not a nonnegative integer");
      }
      if (!(expected_(k, t) > 0.0) || !std::isfinite(expected_(k, t))) {
        throw ValidationError("expected count at unit " + std::to_string(k) + ", period " +
                              std::to_string(t) + " is not positive");
      }
    }
  }
}

double GlmFit::linear_predictor(const CountPanel& panel, int unit, int period) const {
  double eta = 0.0;
  Eigen::Index j = 0;
  if (intercept) eta += beta(j++);
  for (const auto& x : panel.covariates()) eta += beta(j++) * x(unit, period);
  return eta;
}

Eigen::MatrixXd design_matrix(const CountPanel& panel, bool intercept) {
  const Eigen::Index n = static_cast<Eigen::Index>(panel.units()) * panel.periods();
  const Eigen::Index p = panel.covariate_count() + (intercept ? 1 : 0);
  Eigen::MatrixXd x(n, p);
  for (int k = 0; k < panel.units(); ++k) {
    for (int t = 0; t < panel.periods(); ++t) {
      const Eigen::Index row = static_cast<Eigen::Index>(k) * panel.periods() + t;
      Eigen::Index col = 0;
      if (intercept) x(row, col++) = 1.0;
      for (const auto& cov : panel.covariates()) x(row, col++) = cov(k, t);
    }
  }
  return x;
}

namespace {

struct PooledData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd log_offset;
};

PooledData pool(const CountPanel& panel, bool intercept) {
  PooledData d{design_matrix(panel, intercept), {}, {}};
  const Eigen::Index n = d.x.rows();
  d.y.resize(n);
  d.log_offset.resize(n);
  for (int k = 0; k < panel.units(); ++k) {
    for (int t = 0; t < panel.periods(); ++t) {
      const Eigen::Index row = static_cast<Eigen::Index>(k) * panel.periods() + t;
      d.y(row) = panel.counts()(k, t);
      d.log_offset(row) = std::log(panel.expected()(k, t));
    }
  }
  return d;
}

double log_likelihood(const PooledData& d, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = d.x * beta + d.log_offset;
  return (d.y.array() * eta.array() - eta.array().exp()).sum();
}

double deviance(const PooledData& d, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double y = d.y(i);
    dev += (y > 0.0 ? y * std::log(y / mu(i)) : 0.0) - (y - mu(i));
  }
  return 2.0 * dev;
}

}  // namespace

double poisson_log_likelihood(const CountPanel& panel, const Eigen::VectorXd& beta, bool intercept) {
  const PooledData d = pool(panel, intercept);
  if (beta.size() != d.x.cols()) throw ValidationError("coefficient vector has the wrong length");
  return log_likelihood(d, beta);
}

GlmFit fit_poisson_glm(const CountPanel& panel, const GlmOptions& options) {
  if (options.max_iterations < 1) throw ValidationError("max_iterations must be positive");
  const PooledData d = pool(panel, options.intercept);
  const Eigen::Index p = d.x.cols();
  if (p == 0) throw ValidationError("Poisson GLM needs an intercept or at least one covariate");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
  if (qr.rank() < p) {
    throw ValidationError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                          " < " + std::to_string(p) + ")");
  }

  GlmFit fit;
  fit.intercept = options.intercept;
  fit.beta = Eigen::VectorXd::Zero(p);
  if (options.intercept) {
    const double total_y = d.y.sum();
    const double total_e = d.log_offset.array().exp().sum();
    if (total_y > 0.0) fit.beta(0) = std::log(total_y / total_e);
  }

  double ll = log_likelihood(d, fit.beta);
  Eigen::VectorXd mu;
  bool polished = false;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const Eigen::VectorXd eta = d.x * fit.beta + d.log_offset;
    mu = eta.array().exp();
    const Eigen::VectorXd score = d.x.transpose() * (d.y - mu);
    fit.max_abs_score = score.cwiseAbs().maxCoeff();
    if (fit.max_abs_score < options.score_tolerance) {
      fit.converged = true;
      break;
    }

    // IRLS step: weights mu, working response eta - offset + (y - mu) / mu.
    const Eigen::VectorXd z = (eta - d.log_offset).array() + (d.y - mu).array() / mu.array();
    const Eigen::MatrixXd xtwx = d.x.transpose() * mu.asDiagonal() * d.x;
    const Eigen::VectorXd xtwz = d.x.transpose() * (mu.array() * z.array()).matrix();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
    if (ldlt.info() != Eigen::Success) throw NumericalError("IRLS normal equations are singular");
    const Eigen::VectorXd next = ldlt.solve(xtwz);
    if (!next.allFinite()) throw NumericalError("IRLS produced non-finite coefficients");

    const double next_ll = log_likelihood(d, next);
    fit.beta = next;
    fit.iterations = iter;
    const bool small_change = std::abs(next_ll - ll) < options.relative_loglik_tolerance * std::max(1.0, std::abs(ll));
    ll = next_ll;
    if (small_change) {
      mu = (d.x * fit.beta + d.log_offset).array().exp();
      fit.max_abs_score = (d.x.transpose() * (d.y - mu)).cwiseAbs().maxCoeff();
      // One more Newton step if the score is still above tolerance.
      if (fit.max_abs_score >= options.score_tolerance && !polished && iter < options.max_iterations) {
        polished = true;
        continue;
      }
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) {
    throw NumericalError("Poisson GLM did not converge within " + std::to_string(options.max_iterations) +
                         " iterations");
  }
  mu = (d.x * fit.beta + d.log_offset).array().exp();
  fit.deviance = deviance(d, mu);
  return fit;
}

Eigen::MatrixXd raw_residuals(const CountPanel& panel, const GlmFit& fit) {
  if (!fit.converged) throw ValidationError("raw residuals need a converged GLM fit");
  const Eigen::Index expected_p = panel.covariate_count() + (fit.intercept ? 1 : 0);
  if (fit.beta.size() != expected_p) throw ValidationError("GLM fit does not match the panel's covariates");
  Eigen::MatrixXd r(panel.units(), panel.periods());
  for (int k = 0; k < panel.units(); ++k) {
    for (int t = 0; t < panel.periods(); ++t) {
      const double y = panel.counts()(k, t);
      const double corrected = y > 0.0 ? y : 0.5;
      r(k, t) = std::log(corrected / panel.expected()(k, t)) - fit.linear_predictor(panel, k, t);
    }
  }
  return r;
}

ResidualSurface temporal_average(const Eigen::MatrixXd& residuals) {
  if (residuals.cols() < 1) throw ValidationError("temporal average needs at least one period");
  std::vector<double> values(static_cast<std::size_t>(residuals.rows()));
  for (Eigen::Index k = 0; k < residuals.rows(); ++k) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < residuals.cols(); ++t) s += residuals(k, t);
    values[k] = s / static_cast<double>(residuals.cols());
  }
  return ResidualSurface(std::move(values));
}

}  // namespace spnb
