#include "spnb/datagen.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "spnb/errors.hpp"

namespace spnb {
namespace {

Eigen::MatrixXd pair_distances(double d) {
  Eigen::MatrixXd m(2, 2);
  m << 0, d, d, 0;
  return m;
}

TEST(ExponentialCorrelationTest, Examples) {
  const Eigen::MatrixXd d = distance_matrix(lattice_centroids(3, 3));
  EXPECT_TRUE(exponential_correlation(d, 0.0).isApprox(Eigen::MatrixXd::Ones(9, 9)));
  const Eigen::MatrixXd c = exponential_correlation(pair_distances(2.5), std::log(4.0) / 2.5);
  EXPECT_NEAR(c(0, 1), 0.25, 1e-15);
  const Eigen::MatrixXd lat = exponential_correlation(d, 0.7);
  for (int i = 0; i < 9; ++i) EXPECT_EQ(lat(i, i), 1.0);
  EXPECT_TRUE(lat.isApprox(lat.transpose()));
}

TEST(ExponentialCorrelationTest, RejectsInvalidDistances) {
  Eigen::MatrixXd asym = pair_distances(1.0);
  asym(0, 1) = 2.0;
  EXPECT_THROW(exponential_correlation(asym, 1.0), ValidationError);
  Eigen::MatrixXd diag = pair_distances(1.0);
  diag(0, 0) = 0.1;
  EXPECT_THROW(exponential_correlation(diag, 1.0), ValidationError);
  EXPECT_THROW(exponential_correlation(pair_distances(-1.0), 1.0), ValidationError);
  EXPECT_THROW(exponential_correlation(pair_distances(1.0), -0.5), ValidationError);
}

TEST(CalibrateRangeTest, SinglePairClosedForm) {
  for (double d : {0.5, 1.0, 3.0, 40.0}) {
    EXPECT_NEAR(calibrate_range(pair_distances(d), 0.25) * d, std::log(4.0), 1e-7);
  }
}

TEST(CalibrateRangeTest, HighTargetsGiveSmallDecay) {
  const Eigen::MatrixXd d = distance_matrix(lattice_centroids(4, 4));
  const double a = calibrate_range(d, 0.9);
  const double b = calibrate_range(d, 0.999);
  EXPECT_LT(b, a);
  EXPECT_LT(b, 1e-3);
  EXPECT_THROW(calibrate_range(d, 1.0), ValidationError);
  EXPECT_THROW(calibrate_range(d, 0.0), ValidationError);
  EXPECT_THROW(calibrate_range(Eigen::MatrixXd::Zero(3, 3), 0.5), ValidationError);
}

TEST(CalibrateRangeTest, SelfConsistentOnLattices) {
  for (int side : {5, 10}) {
    const Eigen::MatrixXd d = distance_matrix(lattice_centroids(side, side));
    for (double target : {0.15, 0.25, 0.6}) {
      const double xi = calibrate_range(d, target);
      // Recompute the off-diagonal mean from the matrix itself.
      const Eigen::MatrixXd c = exponential_correlation(d, xi);
      const double k = static_cast<double>(d.rows());
      const double mean = (c.sum() - k) / (k * (k - 1.0));
      EXPECT_NEAR(mean, target, 1e-6);
    }
  }
}

TEST(MvnSamplerTest, IdentityMomentsMonteCarlo) {
  Rng rng = make_rng(11);
  const MvnSampler unit(Eigen::MatrixXd::Identity(3, 3));
  const MvnSampler scaled(0.25 * Eigen::MatrixXd::Identity(3, 3));
  const int draws = 100000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d sum_sq = Eigen::Vector3d::Zero();
  for (int i = 0; i < draws; ++i) {
    sum += unit.draw(Eigen::Vector3d::Zero(), rng);
    const Eigen::VectorXd s = scaled.draw(Eigen::Vector3d::Zero(), rng);
    sum_sq += s.cwiseProduct(s);
  }
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(sum(j) / draws, 0.0, 0.02);
    EXPECT_NEAR(std::sqrt(sum_sq(j) / draws), 0.5, 0.02);
  }
}

TEST(MvnSamplerTest, DeterministicGivenState) {
  const Eigen::MatrixXd sigma = exponential_correlation(distance_matrix(lattice_centroids(3, 3)), 0.5);
  Rng a = make_rng(5, 2);
  Rng b = make_rng(5, 2);
  EXPECT_EQ(sample_mvn(Eigen::VectorXd::Zero(9), sigma, a), sample_mvn(Eigen::VectorXd::Zero(9), sigma, b));
}

TEST(MvnSamplerTest, RejectsDegenerateCovariance) {
  Eigen::MatrixXd zero_dir = Eigen::MatrixXd::Identity(3, 3);
  zero_dir(2, 2) = 0.0;
  EXPECT_THROW(MvnSampler{zero_dir}, ValidationError);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(MvnSampler{indefinite}, ValidationError);
}

TEST(MvnSamplerTest, RankDeficientCorrelationRecoveredByJitter) {
  // xi = 0 gives the rank-one all-ones matrix; jitter should make it usable.
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
  Rng rng = make_rng(3);
  EXPECT_NO_THROW(sample_mvn(Eigen::VectorXd::Zero(4), ones, rng));
}

TEST(StepChangeTest, Examples) {
  const StepChange zero = step_change_mean(3, 3, 0.0);
  EXPECT_TRUE(zero.mean.isZero());
  EXPECT_EQ(zero.region_label, (std::vector<int>{-1, 0, 1, -1, 0, 1, -1, 0, 1}));

  const StepChange half = step_change_mean(3, 3, 0.5);
  for (int r = 0; r < 3; ++r) {
    EXPECT_EQ(half.mean(r * 3 + 0), -0.5);
    EXPECT_EQ(half.mean(r * 3 + 1), 0.0);
    EXPECT_EQ(half.mean(r * 3 + 2), 0.5);
  }
  EXPECT_THROW(step_change_mean(3, 3, -0.1), ValidationError);
}

TEST(StepChangeTest, BandsAreContiguousAndBalanced) {
  for (int cols = 3; cols <= 12; ++cols) {
    const StepChange s = step_change_mean(2, cols, 1.0);
    std::vector<int> width(3, 0);
    for (int c = 0; c < cols; ++c) {
      ++width[s.region_label[c] + 1];
      if (c > 0) EXPECT_GE(s.region_label[c], s.region_label[c - 1]);
    }
    for (int w : width) EXPECT_LE(std::abs(w - cols / 3), 1) << cols;
  }
}

TEST(StepChangeTest, BoundaryEdgesAreLabelChanges) {
  const StepChange s = step_change_mean(4, 9, 0.25);
  const Graph g = lattice_graph(4, 9);
  int cross = 0;
  for (const Edge& e : g.edges()) {
    const bool horizontal = e.v == e.u + 1;
    const int col = e.u % 9;
    const bool at_band_edge = horizontal && (col == 2 || col == 5);
    EXPECT_EQ(s.region_label[e.u] != s.region_label[e.v], at_band_edge);
    cross += at_band_edge;
  }
  EXPECT_EQ(cross, 8);
}

TEST(Ar1Test, StationaryLag1Autocorrelation) {
  Rng rng = make_rng(17);
  const Eigen::VectorXd x = simulate_ar1(5000, 0.8, 0.1, rng);
  const double mean = x.mean();
  double num = 0.0;
  double den = 0.0;
  for (int t = 0; t < x.size(); ++t) {
    den += (x(t) - mean) * (x(t) - mean);
    if (t > 0) num += (x(t) - mean) * (x(t - 1) - mean);
  }
  EXPECT_NEAR(num / den, 0.8, 0.05);
  EXPECT_NEAR(std::sqrt(den / x.size()), 0.1, 0.02);
}

TEST(SimulatePanelTest, RareEventExpectedCountsInRange) {
  SimulationConfig cfg;
  cfg.e_range = {10.0, 30.0};
  const SimulatedPanel sim = simulate_panel(cfg);
  EXPECT_GE(sim.panel.expected().minCoeff(), 10.0);
  EXPECT_LE(sim.panel.expected().maxCoeff(), 30.0);
  EXPECT_EQ(sim.panel.units(), 100);
  EXPECT_EQ(sim.panel.periods(), 9);
  EXPECT_EQ(sim.panel.covariate_count(), 2);
}

TEST(SimulatePanelTest, TruthBookkeepingIsExact) {
  SimulationConfig cfg;
  cfg.lambda = 0.5;
  const SimulatedPanel sim = simulate_panel(cfg, 3);
  for (int i = 0; i < sim.panel.units(); ++i) {
    for (int t = 0; t < sim.panel.periods(); ++t) {
      double eta = 0.0;
      for (int j = 0; j < 2; ++j) eta += cfg.beta[j] * sim.panel.covariates()[j](i, t);
      eta += sim.phi(i, t) + sim.delta(t);
      EXPECT_EQ(sim.theta(i, t), std::exp(eta));
    }
  }
}

TEST(SimulatePanelTest, ReproducibleAndReplicatesDiffer) {
  SimulationConfig cfg;
  cfg.rows = 4;
  cfg.cols = 5;
  const SimulatedPanel a = simulate_panel(cfg, 7);
  const SimulatedPanel b = simulate_panel(cfg, 7);
  const SimulatedPanel c = simulate_panel(cfg, 8);
  EXPECT_EQ(a.panel.counts(), b.panel.counts());
  EXPECT_EQ(a.panel.expected(), b.panel.expected());
  EXPECT_EQ(a.phi, b.phi);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_NE(a.phi, c.phi);
}

TEST(SimulatePanelTest, CalibratedRangesMatchTargets) {
  const SimulationConfig cfg;
  const SimulatedPanel sim = simulate_panel(cfg);
  const Eigen::MatrixXd d = distance_matrix(sim.centroids);
  EXPECT_NEAR(mean_offdiagonal_correlation(d, sim.xi_covariate), 0.25, 1e-6);
  EXPECT_NEAR(mean_offdiagonal_correlation(d, sim.xi_phi), 0.15, 1e-6);
}

TEST(SimulatePanelTest, NullRiskLimitMonteCarlo) {
  SimulationConfig cfg;
  cfg.beta = {0.0, 0.0};
  cfg.phi_sd = 1e-12;
  cfg.phi_star_sd = 1e-12;
  cfg.delta_sd = 1e-12;
  const SimulatedPanel sim = simulate_panel(cfg);
  const Eigen::ArrayXXd smr = sim.panel.counts().array() / sim.panel.expected().array();
  const double mean = smr.mean();
  // Var(Y/e) = 1/e under theta = 1.
  const double se = std::sqrt((1.0 / sim.panel.expected().array()).sum()) / static_cast<double>(smr.size());
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * se);
}

TEST(SimulatePanelTest, StepChangeBandMeansOrdered) {
  SimulationConfig cfg;
  cfg.lambda = 0.5;
  cfg.rows = 6;
  cfg.cols = 6;
  const int reps = 100;
  std::vector<double> sum(3, 0.0);
  std::vector<double> sum_sq(3, 0.0);
  for (int r = 0; r < reps; ++r) {
    const SimulatedPanel sim = simulate_panel(cfg, r);
    std::vector<double> band(3, 0.0);
    std::vector<int> count(3, 0);
    for (int i = 0; i < 36; ++i) {
      band[sim.region_label[i] + 1] += sim.phi.row(i).mean();
      ++count[sim.region_label[i] + 1];
    }
    for (int b = 0; b < 3; ++b) {
      const double m = band[b] / count[b];
      sum[b] += m;
      sum_sq[b] += m * m;
    }
  }
  std::vector<double> mean(3);
  for (int b = 0; b < 3; ++b) {
    mean[b] = sum[b] / reps;
    const double sd = std::sqrt((sum_sq[b] - reps * mean[b] * mean[b]) / (reps - 1));
    EXPECT_NEAR(mean[b], 0.5 * (b - 1), 3.0 * sd / std::sqrt(reps)) << "band " << b;
  }
  EXPECT_LT(mean[0], mean[1]);
  EXPECT_LT(mean[1], mean[2]);
}

TEST(SimulationConfigTest, Validation) {
  SimulationConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.alpha = 1.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = cfg;
  bad.phi_sd = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = cfg;
  bad.phi_target_corr = 1.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = cfg;
  bad.e_range = {-1.0, 5.0};
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = cfg;
  bad.lambda = -0.5;
  EXPECT_THROW(simulate_panel(bad), ValidationError);
}

}  // namespace
}  // namespace spnb
