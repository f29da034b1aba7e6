#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "coxgibbs/dataset.hpp"

namespace coxgibbs {

enum class Ties { breslow, efron };

/// "breslow" or "efron"; throws std::invalid_argument otherwise.
Ties parse_ties(std::string_view name);
std::string_view to_string(Ties ties);

/// Log partial likelihood with its analytic gradient and Hessian.
struct ScoreHessian {
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;  ///< negative semi-definite
  double loglik = 0.0;
};

/// Cox partial likelihood evaluator for one dataset.
///
/// The constructor sorts subjects by descending time once (O(n log n));
/// each evaluation is then a single reverse cumulative sum: O(nP) for the
/// log-likelihood and O(nP^2) for score and Hessian. Sums are kept relative
/// to a running maximum of the linear predictor so that |X'beta| in the
/// hundreds does not overflow.
class PartialLikelihood {
 public:
  PartialLikelihood(const SurvivalDataset& data, Ties ties);

  double log_likelihood(const Eigen::VectorXd& beta) const;
  ScoreHessian score_hessian(const Eigen::VectorXd& beta) const;

  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }
  Ties ties() const noexcept { return ties_; }

 private:
  template <bool kDerivatives>
  void evaluate(const Eigen::VectorXd& beta, ScoreHessian& out) const;

  Ties ties_;
  Eigen::MatrixXd x_;                ///< rows in descending-time order
  Eigen::VectorXi event_;            ///< same order
  std::vector<Index> group_start_;   ///< tie groups; group g is [start[g], start[g+1])
};

double log_partial_likelihood(const SurvivalDataset& data, const Eigen::VectorXd& beta,
                              Ties ties = Ties::breslow);
ScoreHessian score_hessian(const SurvivalDataset& data, const Eigen::VectorXd& beta,
                           Ties ties = Ties::breslow);

struct NewtonOptions {
  double tol = 1e-8;  ///< on the sup-norm of the score
  int max_iter = 50;
};

/// Maximum partial likelihood estimate by Newton-Raphson with step halving.
/// Throws SingularHessianError on rank-deficient designs and
/// NonConvergenceError (carrying the last iterate) after max_iter steps.
Eigen::VectorXd mple(const SurvivalDataset& data, const Eigen::VectorXd& init,
                     const NewtonOptions& options = {}, Ties ties = Ties::breslow);
Eigen::VectorXd mple(const SurvivalDataset& data, const NewtonOptions& options = {},
                     Ties ties = Ties::breslow);

}  // namespace coxgibbs
