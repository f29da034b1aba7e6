#include "coxgibbs/metropolis.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "coxgibbs/errors.hpp"
#include "coxgibbs/random.hpp"

namespace coxgibbs {

double mh_log_target(const PartialLikelihood& pl, const PriorSpec& prior, const Eigen::MatrixXd& prior_precision,
                     double learning_rate, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd centered = beta - prior.mean;
  return -0.5 * centered.dot(prior_precision * centered) + learning_rate * pl.log_likelihood(beta);
}

MhReport run_mh(const SurvivalDataset& data, const FitConfig& cfg, Ties ties, std::optional<double> scale) {
  const Index p = data.p();
  cfg.validate(p);
  if (scale && (!(*scale >= 0.0) || !std::isfinite(*scale))) {
    throw std::invalid_argument("mh: proposal scale must be finite and >= 0");
  }
  const PriorSpec prior = cfg.resolved_prior(p);
  const Eigen::MatrixXd prior_precision = prior.precision();
  const PartialLikelihood pl(data, ties);

  MhReport report;
  report.mple = mple(data, NewtonOptions{}, ties);
  const ScoreHessian at_mode = pl.score_hessian(report.mple);
  const Eigen::MatrixXd proposal_precision = cfg.learning_rate * (-at_mode.hessian) + prior_precision;
  Eigen::LLT<Eigen::MatrixXd> prec_llt(proposal_precision);
  if (prec_llt.info() != Eigen::Success) throw NumericalError("mh: proposal precision is not positive definite");
  report.proposal_cov = prec_llt.solve(Eigen::MatrixXd::Identity(p, p));
  report.proposal_scale = scale ? *scale : 2.38 / std::sqrt(static_cast<double>(p));
  Eigen::LLT<Eigen::MatrixXd> cov_llt(report.proposal_cov);
  const Eigen::MatrixXd step_factor = report.proposal_scale * Eigen::MatrixXd(cov_llt.matrixL());

  Rng rng(cfg.seed);
  Eigen::VectorXd beta = cfg.resolved_init(p);
  double log_target = mh_log_target(pl, prior, prior_precision, cfg.learning_rate, beta);
  Eigen::VectorXd z(p);
  long accepted = 0;

  Chain& chain = report.chain;
  chain.samples.resize(cfg.iterations, p);
  chain.burn_in = cfg.burn_in;
  chain.seed = cfg.seed;
  const auto start = std::chrono::steady_clock::now();
  for (int m = 0; m < cfg.iterations; ++m) {
    for (Index k = 0; k < p; ++k) z[k] = rng.normal();
    const Eigen::VectorXd proposal = beta + step_factor * z;
    double proposal_target = -std::numeric_limits<double>::infinity();
    try {
      proposal_target = mh_log_target(pl, prior, prior_precision, cfg.learning_rate, proposal);
    } catch (const EvaluationError&) {
      // Overflowing proposals are rejected.
    }
    const double log_u = std::log(rng.uniform());
    if (log_u < proposal_target - log_target) {
      beta = proposal;
      log_target = proposal_target;
      ++accepted;
    }
    chain.samples.row(m) = beta.transpose();
  }
  chain.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.acceptance_rate = static_cast<double>(accepted) / cfg.iterations;
  report.all_rejected = accepted == 0;
  if (report.all_rejected) chain.diagnostic = "every proposal was rejected";
  return report;
}

}  // namespace coxgibbs
