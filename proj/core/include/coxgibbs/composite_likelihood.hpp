#pragma once

#include <Eigen/Core>

#include "coxgibbs/dataset.hpp"
#include "coxgibbs/partial_likelihood.hpp"

namespace coxgibbs {

/// expit(z), evaluated without overflow for any finite z.
double expit(double z);

/// log expit(z) = -log1p(exp(-z)) for z >= 0, z - log1p(exp(z)) otherwise.
double log_expit(double z);

/// Probability that the event subject of a pair fails before its risk-set
/// peer: expit(contrast' beta).
double pair_prob(const Eigen::VectorXd& beta, const Eigen::VectorXd& contrast);

/// Composite partial log-likelihood with gradient and Hessian.
struct CplEval {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;  ///< negative semi-definite (log-CPL is concave)
};

/// Full evaluation; O(QP^2) because of the Hessian.
CplEval cpl_eval(const PairContrasts& pairs, const Eigen::VectorXd& beta);

/// Score only, O(QP): sum_q (1 - p_q) d_q.
Eigen::VectorXd cpl_score(const PairContrasts& pairs, const Eigen::VectorXd& beta);

/// Maximum composite partial likelihood estimate by Newton iterations.
///
/// Throws SingularHessianError when the contrasts are rank deficient and
/// NonConvergenceError when the pairs are (quasi-)separated: the likelihood
/// keeps increasing along a direction, so the score flattens while the
/// curvature in that direction collapses.
Eigen::VectorXd mcple(const PairContrasts& pairs, const NewtonOptions& options = {});

}  // namespace coxgibbs
