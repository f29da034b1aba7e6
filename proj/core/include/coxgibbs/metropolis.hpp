#pragma once

#include <optional>

#include <Eigen/Core>

#include "coxgibbs/dataset.hpp"
#include "coxgibbs/gibbs.hpp"
#include "coxgibbs/partial_likelihood.hpp"

namespace coxgibbs {

struct MhReport {
  Chain chain;
  double acceptance_rate = 0.0;  ///< accepted / M
  double proposal_scale = 0.0;   ///< s; proposal covariance is s^2 * proposal_cov
  bool all_rejected = false;
  Eigen::VectorXd mple;
  Eigen::MatrixXd proposal_cov;
};

/// Generalized-posterior log density up to a constant:
/// log N(beta | mu0, S0) + w * log L_PL(beta).
double mh_log_target(const PartialLikelihood& pl, const PriorSpec& prior, const Eigen::MatrixXd& prior_precision,
                     double learning_rate, const Eigen::VectorXd& beta);

/// Random-walk Metropolis-Hastings with a Laplace (Hessian) proposal.
///
/// The proposal covariance [w (-H_PL(mple)) + S0^-1]^-1 is fixed once at the
/// maximum partial likelihood estimate and scaled by s^2, s = 2.38 / sqrt(P)
/// unless given. Deterministic given cfg.seed.
MhReport run_mh(const SurvivalDataset& data, const FitConfig& cfg, Ties ties = Ties::breslow,
                std::optional<double> scale = std::nullopt);

}  // namespace coxgibbs
