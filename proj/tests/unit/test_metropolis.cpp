#include <gtest/gtest.h>

#include <numbers>

#include "coxgibbs/metropolis.hpp"
#include "coxgibbs/synth.hpp"
#include "oracles.hpp"

using namespace coxgibbs;

namespace {

SurvivalDataset default_scenario(std::uint64_t seed) {
  SynthConfig c;
  c.beta0 = Eigen::Vector4d(1.0, 0.5, -1.5, 3.0);
  c.seed = seed;
  return generate(c);
}

// log N(beta | mu, S) written out directly, normalising constant included.
double log_normal_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& s) {
  const Eigen::VectorXd r = x - mu;
  const double k = static_cast<double>(x.size());
  return -0.5 * r.dot(s.inverse() * r) - 0.5 * std::log(s.determinant()) - 0.5 * k * std::log(2.0 * std::numbers::pi);
}

}  // namespace

TEST(Mh, ZeroScaleFreezesChain) {
  const auto d = oracle::random_instance(3, 40, 2);
  FitConfig cfg;
  cfg.iterations = 50;
  cfg.burn_in = 10;
  cfg.init = Eigen::Vector2d(0.2, -0.1);
  const auto r = run_mh(d, cfg, Ties::breslow, 0.0);
  for (Index m = 0; m < r.chain.length(); ++m) EXPECT_EQ(r.chain.samples.row(m), cfg.init->transpose());
  EXPECT_EQ(r.acceptance_rate, 1.0);
}

TEST(Mh, TargetPeaksNearMple) {
  const auto d = default_scenario(3);
  const PartialLikelihood pl(d, Ties::breslow);
  const auto prior = PriorSpec::isotropic(4, 100.0);
  const Eigen::MatrixXd prec = prior.precision();
  const auto hat = mple(d);
  for (Index k = 0; k < 4; ++k) {
    const Eigen::VectorXd far = hat + 10.0 * Eigen::VectorXd::Unit(4, k);
    EXPECT_GE(mh_log_target(pl, prior, prec, 1.0, hat), mh_log_target(pl, prior, prec, 1.0, far));
  }
}

TEST(Mh, TargetRatioMatchesDirectDensities) {
  const auto d = oracle::random_instance(5, 40, 2);
  const PartialLikelihood pl(d, Ties::breslow);
  PriorSpec prior;
  prior.mean = Eigen::Vector2d(0.3, -0.2);
  prior.covariance.resize(2, 2);
  prior.covariance << 2.0, 0.5, 0.5, 1.0;
  const Eigen::MatrixXd prec = prior.precision();
  std::mt19937 gen(4);
  std::normal_distribution<double> z(0.0, 1.0);
  const double w = 0.37;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Vector2d a(z(gen), z(gen)), b(z(gen), z(gen));
    const double got = mh_log_target(pl, prior, prec, w, b) - mh_log_target(pl, prior, prec, w, a);
    const double want = log_normal_density(b, prior.mean, prior.covariance) +
                        w * oracle::log_partial_likelihood(d, b, false) -
                        log_normal_density(a, prior.mean, prior.covariance) -
                        w * oracle::log_partial_likelihood(d, a, false);
    EXPECT_NEAR(std::min(1.0, std::exp(got)), std::min(1.0, std::exp(want)), 1e-9);
    EXPECT_NEAR(got, want, 1e-9 * std::max(1.0, std::fabs(want)));
  }
}

TEST(Mh, AcceptanceRateIsACountOverM) {
  const auto d = default_scenario(4);
  FitConfig cfg;
  cfg.seed = 12;
  const auto r = run_mh(d, cfg);
  EXPECT_GT(r.acceptance_rate, 0.05);
  EXPECT_LT(r.acceptance_rate, 0.7);
  const double accepted = r.acceptance_rate * cfg.iterations;
  EXPECT_NEAR(accepted, std::round(accepted), 1e-9);
  Index moves = 0;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(4);
  for (Index m = 0; m < r.chain.length(); ++m) {
    if (r.chain.samples.row(m) != prev.transpose()) ++moves;
    prev = r.chain.samples.row(m).transpose();
  }
  EXPECT_EQ(static_cast<double>(moves), accepted);
  EXPECT_NEAR(r.proposal_scale, 2.38 / 2.0, 1e-15);
  EXPECT_FALSE(r.all_rejected);
}

TEST(Mh, Deterministic) {
  const auto d = oracle::random_instance(5, 40, 2);
  FitConfig cfg;
  cfg.iterations = 200;
  cfg.burn_in = 50;
  cfg.seed = 3;
  EXPECT_EQ(run_mh(d, cfg).chain.samples, run_mh(d, cfg).chain.samples);
}

TEST(Mh, FlatPriorMeanNearMple) {
  const auto d = default_scenario(6);
  const auto hat = mple(d);
  FitConfig cfg;
  cfg.prior = PriorSpec::isotropic(4, 1e6);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(4);
  for (std::uint64_t r = 0; r < 10; ++r) {
    cfg.seed = derive_seed(8, {r});
    avg += run_mh(d, cfg).chain.posterior_mean();
  }
  avg /= 10.0;
  EXPECT_LT((avg - hat).cwiseAbs().maxCoeff(), 0.2);
}
