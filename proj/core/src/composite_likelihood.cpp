#include "coxgibbs/composite_likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "coxgibbs/errors.hpp"

namespace coxgibbs {

double expit(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_expit(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double pair_prob(const Eigen::VectorXd& beta, const Eigen::VectorXd& contrast) {
  if (beta.size() != contrast.size()) throw std::invalid_argument("pair_prob: dimension mismatch");
  return expit(contrast.dot(beta));
}

namespace {

void check_beta(const PairContrasts& pairs, const Eigen::VectorXd& beta) {
  if (pairs.size() < 1) throw EmptyPairsError("composite likelihood needs at least one pair");
  if (beta.size() != pairs.p()) throw std::invalid_argument("composite likelihood: beta has wrong dimension");
  if (!beta.allFinite()) throw std::invalid_argument("composite likelihood: beta must be finite");
}

}  // namespace

CplEval cpl_eval(const PairContrasts& pairs, const Eigen::VectorXd& beta) {
  check_beta(pairs, beta);
  const Eigen::VectorXd eta = pairs.contrasts * beta;
  const Index q = eta.size();
  Eigen::VectorXd resid(q), weight(q);
  double loglik = 0.0;
  for (Index k = 0; k < q; ++k) {
    const double pk = expit(eta[k]);
    // 1 - p computed as expit(-eta) to keep precision when p is near 1.
    const double one_minus = expit(-eta[k]);
    loglik += log_expit(eta[k]);
    resid[k] = one_minus;
    weight[k] = pk * one_minus;
  }
  CplEval out;
  out.loglik = loglik;
  out.score.noalias() = pairs.contrasts.transpose() * resid;
  const Eigen::MatrixXd weighted = pairs.contrasts.array().colwise() * weight.array();
  out.hessian.noalias() = -(pairs.contrasts.transpose() * weighted);
  return out;
}

Eigen::VectorXd cpl_score(const PairContrasts& pairs, const Eigen::VectorXd& beta) {
  check_beta(pairs, beta);
  Eigen::VectorXd resid = -(pairs.contrasts * beta);
  for (Index k = 0; k < resid.size(); ++k) resid[k] = expit(resid[k]);
  return pairs.contrasts.transpose() * resid;
}

Eigen::VectorXd mcple(const PairContrasts& pairs, const NewtonOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("mcple: tol must be > 0");
  if (pairs.size() < 1) throw EmptyPairsError("mcple needs at least one pair");
  const Index p = pairs.p();

  // Curvature of the design itself; p(1-p) <= 1/4 so -H <= gram / 4.
  const Eigen::MatrixXd gram = pairs.contrasts.transpose() * pairs.contrasts;
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt(gram);
  if (gram_ldlt.info() != Eigen::Success || gram_ldlt.rcond() < 1e-13 ||
      (gram_ldlt.vectorD().array() <= 0.0).any()) {
    throw SingularHessianError("mcple: pair contrasts are rank deficient");
  }

  // Smallest generalized eigenvalue of (-H, gram/4): the worst-direction
  // average of 4 p (1 - p). Tends to zero under separation.
  auto relative_curvature = [&](const Eigen::MatrixXd& info) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(info, 0.25 * gram, Eigen::EigenvaluesOnly);
    return ges.eigenvalues().minCoeff();
  };
  constexpr double kSeparationCurvature = 1e-6;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  CplEval ev = cpl_eval(pairs, beta);
  for (int iter = 0; iter <= options.max_iter; ++iter) {
    const Eigen::MatrixXd info = -ev.hessian;
    if (relative_curvature(info) < kSeparationCurvature) {
      throw NonConvergenceError("mcple: pairs appear separated; the composite likelihood has no finite maximizer",
                                beta);
    }
    if (ev.score.lpNorm<Eigen::Infinity>() <= options.tol) return beta;
    if (iter == options.max_iter) break;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) throw SingularHessianError("mcple: singular Hessian");
    const Eigen::VectorXd step = ldlt.solve(ev.score);
    double t = 1.0;
    CplEval next;
    Eigen::VectorXd candidate;
    for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
      candidate = beta + t * step;
      next = cpl_eval(pairs, candidate);
      if (next.loglik >= ev.loglik - 1e-12 * std::fabs(ev.loglik)) break;
    }
    beta = std::move(candidate);
    ev = std::move(next);
  }
  throw NonConvergenceError("mcple: no convergence after " + std::to_string(options.max_iter) + " Newton steps",
                            beta);
}

}  // namespace coxgibbs
