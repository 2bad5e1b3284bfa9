#include "spnb/residuals.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "glm_oracle.hpp"
#include "spnb/errors.hpp"

namespace spnb {
namespace {

using testing::newton_oracle;
using testing::random_panel;

CountPanel constant_panel(const Eigen::MatrixXd& y, const Eigen::MatrixXd& e) {
  return CountPanel(y, e, {});
}

TEST(CountPanelTest, Validation) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(2, 2, 3.0);
  Eigen::MatrixXd e = Eigen::MatrixXd::Constant(2, 2, 1.0);
  EXPECT_NO_THROW(CountPanel(y, e, {}));
  Eigen::MatrixXd bad_e = e;
  bad_e(1, 1) = 0.0;
  EXPECT_THROW(CountPanel(y, bad_e, {}), ValidationError);
  Eigen::MatrixXd frac = y;
  frac(0, 1) = 1.5;
  EXPECT_THROW(CountPanel(frac, e, {}), ValidationError);
  Eigen::MatrixXd neg = y;
  neg(0, 0) = -1.0;
  EXPECT_THROW(CountPanel(neg, e, {}), ValidationError);
  EXPECT_THROW(CountPanel(y, Eigen::MatrixXd::Ones(3, 2), {}), ValidationError);
  EXPECT_THROW(CountPanel(y, e, {Eigen::MatrixXd::Zero(2, 3)}), ValidationError);
}

TEST(PoissonGlmTest, InterceptOnlyRateOne) {
  Eigen::MatrixXd e(2, 3);
  e << 4, 7, 9, 12, 5, 20;
  const GlmFit fit = fit_poisson_glm(constant_panel(e, e));
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.beta(0), 0.0, 1e-12);
}

TEST(PoissonGlmTest, InterceptOnlyRateTwo) {
  Eigen::MatrixXd e(2, 3);
  e << 4, 7, 9, 12, 5, 20;
  const GlmFit fit = fit_poisson_glm(constant_panel(2.0 * e, e));
  EXPECT_NEAR(fit.beta(0), std::numbers::ln2, 1e-12);
}

TEST(PoissonGlmTest, MatchesNewtonOracle) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const CountPanel panel = random_panel(rng, 10, 3, 2);
    const GlmFit fit = fit_poisson_glm(panel);
    const auto oracle = newton_oracle(panel);
    ASSERT_TRUE(fit.converged);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(fit.beta(j), oracle[j], 1e-8) << "coef " << j;
  }
}

TEST(PoissonGlmTest, ScoreEquationsHoldAtFit) {
  std::mt19937_64 rng(103);
  const CountPanel panel = random_panel(rng, 30, 5, 3, 100.0, 200.0);
  const GlmFit fit = fit_poisson_glm(panel);
  const Eigen::MatrixXd x = design_matrix(panel, true);
  Eigen::VectorXd resid(x.rows());
  for (int i = 0; i < panel.units(); ++i) {
    for (int t = 0; t < panel.periods(); ++t) {
      resid(i * panel.periods() + t) =
          panel.counts()(i, t) - panel.expected()(i, t) * std::exp(fit.linear_predictor(panel, i, t));
    }
  }
  EXPECT_LT((x.transpose() * resid).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(PoissonGlmTest, RankDeficientDesignRejected) {
  std::mt19937_64 rng(107);
  const CountPanel base = random_panel(rng, 6, 2, 1);
  const CountPanel dup(base.counts(), base.expected(), {base.covariates()[0], 2.0 * base.covariates()[0]});
  EXPECT_THROW(fit_poisson_glm(dup), ValidationError);
}

TEST(PoissonGlmTest, IterationCapRaisesNumericalError) {
  std::mt19937_64 rng(109);
  const CountPanel panel = random_panel(rng, 10, 3, 2);
  GlmOptions opts;
  opts.max_iterations = 1;
  EXPECT_THROW(fit_poisson_glm(panel, opts), NumericalError);
}

TEST(RawResidualsTest, Examples) {
  Eigen::MatrixXd e(1, 3);
  e << 10, 10, 10;
  Eigen::MatrixXd y(1, 3);
  y << 10, 20, 0;
  GlmFit zero_fit;
  zero_fit.beta = Eigen::VectorXd::Zero(1);
  zero_fit.converged = true;
  const Eigen::MatrixXd r = raw_residuals(CountPanel(y, e, {}), zero_fit);
  EXPECT_DOUBLE_EQ(r(0, 0), 0.0);
  EXPECT_NEAR(r(0, 1), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(r(0, 2), std::log(0.5 / 10.0), 1e-15);
  EXPECT_NEAR(r(0, 2), -2.9957, 1e-4);

  GlmFit ln2_fit = zero_fit;
  ln2_fit.beta(0) = std::numbers::ln2;
  EXPECT_NEAR(raw_residuals(CountPanel(y, e, {}), ln2_fit)(0, 1), 0.0, 1e-15);

  GlmFit unconverged = zero_fit;
  unconverged.converged = false;
  EXPECT_THROW(raw_residuals(CountPanel(y, e, {}), unconverged), ValidationError);
}

TEST(TemporalAverageTest, Examples) {
  Eigen::MatrixXd single(3, 1);
  single << 0.5, -1.0, 2.0;
  const auto s = temporal_average(single);
  EXPECT_EQ(std::vector<double>(s.values().begin(), s.values().end()), (std::vector<double>{0.5, -1.0, 2.0}));

  Eigen::MatrixXd flat(2, 4);
  flat << 1, 1, 1, 1, -3, -3, -3, -3;
  const auto f = temporal_average(flat);
  EXPECT_DOUBLE_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[1], -3.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(3, 4);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t < 4; ++t) m(i, t) = normal(rng);
  }
  const auto avg = temporal_average(m);
  for (int i = 0; i < 3; ++i) {
    long double acc = 0.0L;
    for (int t = 3; t >= 0; --t) acc += m(i, t);
    EXPECT_NEAR(avg[i], static_cast<double>(acc / 4.0L), 1e-14);
  }
}

TEST(ResidualPipelineTest, CommonScalingIsAbsorbedByIntercept) {
  std::mt19937_64 rng(113);
  const CountPanel panel = random_panel(rng, 20, 4, 2, 50.0, 100.0);
  ASSERT_GT(panel.counts().minCoeff(), 0.0);
  const CountPanel scaled(3.0 * panel.counts(), panel.expected(), panel.covariates());
  const auto a = temporal_average(raw_residuals(panel, fit_poisson_glm(panel)));
  const auto b = temporal_average(raw_residuals(scaled, fit_poisson_glm(scaled)));
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(a[i], b[i], 1e-8);
}

}  // namespace
}  // namespace spnb
