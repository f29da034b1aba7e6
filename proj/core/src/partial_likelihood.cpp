#include "coxgibbs/partial_likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "coxgibbs/errors.hpp"

namespace coxgibbs {

Ties parse_ties(std::string_view name) {
  if (name == "breslow") return Ties::breslow;
  if (name == "efron") return Ties::efron;
  throw std::invalid_argument("unknown tie method '" + std::string(name) + "' (expected breslow or efron)");
}

std::string_view to_string(Ties ties) { return ties == Ties::breslow ? "breslow" : "efron"; }

PartialLikelihood::PartialLikelihood(const SurvivalDataset& data, Ties ties) : ties_(ties) {
  const Index n = data.n();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& t = data.times();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return t[a] > t[b]; });

  x_.resize(n, data.p());
  event_.resize(n);
  for (Index r = 0; r < n; ++r) {
    x_.row(r) = data.covariates().row(order[r]);
    event_[r] = data.events()[order[r]];
    if (r == 0 || t[order[r]] != t[order[r - 1]]) group_start_.push_back(r);
  }
  group_start_.push_back(n);
}

template <bool kDerivatives>
void PartialLikelihood::evaluate(const Eigen::VectorXd& beta, ScoreHessian& out) const {
  const Index p = x_.cols();
  if (beta.size() != p) throw std::invalid_argument("partial likelihood: beta has wrong dimension");
  if (!beta.allFinite()) throw std::invalid_argument("partial likelihood: beta must be finite");

  const Eigen::VectorXd eta = x_ * beta;
  // Risk-set sums of w_j, w_j x_j, w_j x_j x_j' with w_j = exp(eta_j - shift).
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2;
  // Same sums over the events of the current tie group (Efron).
  double d0 = 0.0;
  Eigen::VectorXd d1, a1;
  Eigen::MatrixXd d2, a2;
  if constexpr (kDerivatives) {
    s2 = Eigen::MatrixXd::Zero(p, p);
    out.score = Eigen::VectorXd::Zero(p);
    out.hessian = Eigen::MatrixXd::Zero(p, p);
    d1.resize(p);
    d2.resize(p, p);
  }
  double shift = -std::numeric_limits<double>::infinity();
  double loglik = 0.0;

  const std::size_t groups = group_start_.size() - 1;
  for (std::size_t g = 0; g < groups; ++g) {
    const Index begin = group_start_[g], end = group_start_[g + 1];
    const double group_max = eta.segment(begin, end - begin).maxCoeff();
    if (group_max > shift) {
      const double scale = std::isfinite(shift) ? std::exp(shift - group_max) : 0.0;
      s0 *= scale;
      if constexpr (kDerivatives) {
        s1 *= scale;
        s2 *= scale;
      }
      shift = group_max;
    }
    int deaths = 0;
    d0 = 0.0;
    if constexpr (kDerivatives) {
      d1.setZero();
      d2.setZero();
    }
    for (Index r = begin; r < end; ++r) {
      const double w = std::exp(eta[r] - shift);
      s0 += w;
      if constexpr (kDerivatives) {
        s1.noalias() += w * x_.row(r).transpose();
        s2.selfadjointView<Eigen::Lower>().rankUpdate(x_.row(r).transpose(), w);
      }
      if (event_[r]) {
        ++deaths;
        loglik += eta[r];
        if constexpr (kDerivatives) out.score.noalias() += x_.row(r).transpose();
        if (ties_ == Ties::efron) {
          d0 += w;
          if constexpr (kDerivatives) {
            d1.noalias() += w * x_.row(r).transpose();
            d2.selfadjointView<Eigen::Lower>().rankUpdate(x_.row(r).transpose(), w);
          }
        }
      }
    }
    if (deaths == 0) continue;

    if (ties_ == Ties::breslow || deaths == 1) {
      loglik -= deaths * (std::log(s0) + shift);
      if constexpr (kDerivatives) {
        const Eigen::VectorXd mean = s1 / s0;
        out.score.noalias() -= deaths * mean;
        Eigen::MatrixXd cov = s2 / s0;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(mean, -1.0);
        out.hessian.noalias() -= deaths * cov;
      }
    } else {
      for (int k = 0; k < deaths; ++k) {
        const double f = static_cast<double>(k) / deaths;
        const double denom = s0 - f * d0;
        loglik -= std::log(denom) + shift;
        if constexpr (kDerivatives) {
          a1 = s1 - f * d1;
          a2 = s2 - f * d2;
          const Eigen::VectorXd mean = a1 / denom;
          out.score.noalias() -= mean;
          Eigen::MatrixXd cov = a2 / denom;
          cov.selfadjointView<Eigen::Lower>().rankUpdate(mean, -1.0);
          out.hessian.noalias() -= cov;
        }
      }
    }
  }
  if (!std::isfinite(loglik)) {
    throw EvaluationError("partial likelihood is not finite at this beta; consider centering or scaling covariates");
  }
  out.loglik = loglik;
  if constexpr (kDerivatives) {
    // Only the lower triangle was accumulated.
    out.hessian = out.hessian.selfadjointView<Eigen::Lower>();
  }
}

double PartialLikelihood::log_likelihood(const Eigen::VectorXd& beta) const {
  ScoreHessian out;
  evaluate<false>(beta, out);
  return out.loglik;
}

ScoreHessian PartialLikelihood::score_hessian(const Eigen::VectorXd& beta) const {
  ScoreHessian out;
  evaluate<true>(beta, out);
  return out;
}

double log_partial_likelihood(const SurvivalDataset& data, const Eigen::VectorXd& beta, Ties ties) {
  return PartialLikelihood(data, ties).log_likelihood(beta);
}

ScoreHessian score_hessian(const SurvivalDataset& data, const Eigen::VectorXd& beta, Ties ties) {
  return PartialLikelihood(data, ties).score_hessian(beta);
}

namespace {

// Solves (-H) step = score; throws when -H is numerically singular.
Eigen::VectorXd newton_step(const ScoreHessian& sh) {
  const Eigen::MatrixXd info = -sh.hessian;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  const double scale = info.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(scale > 0.0) || ldlt.rcond() < 1e-13 ||
      (ldlt.vectorD().array() <= 0.0).any()) {
    throw SingularHessianError(
        "partial-likelihood Hessian is singular; check for constant or collinear covariates");
  }
  return ldlt.solve(sh.score);
}

}  // namespace

Eigen::VectorXd mple(const SurvivalDataset& data, const Eigen::VectorXd& init, const NewtonOptions& options,
                     Ties ties) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("mple: tol must be > 0");
  if (init.size() != data.p()) throw std::invalid_argument("mple: init has wrong dimension");
  const PartialLikelihood pl(data, ties);
  Eigen::VectorXd beta = init;
  ScoreHessian sh = pl.score_hessian(beta);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    if (sh.score.lpNorm<Eigen::Infinity>() <= options.tol) return beta;
    const Eigen::VectorXd step = newton_step(sh);
    double t = 1.0;
    Eigen::VectorXd candidate;
    ScoreHessian next;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
      candidate = beta + t * step;
      try {
        next = pl.score_hessian(candidate);
      } catch (const EvaluationError&) {
        continue;
      }
      if (next.loglik >= sh.loglik - 1e-12 * std::fabs(sh.loglik)) {
        improved = true;
        break;
      }
    }
    if (!improved) {
      throw NonConvergenceError("mple: line search failed to improve the partial likelihood", beta);
    }
    beta = std::move(candidate);
    sh = std::move(next);
  }
  if (sh.score.lpNorm<Eigen::Infinity>() <= options.tol) return beta;
  throw NonConvergenceError("mple: no convergence after " + std::to_string(options.max_iter) + " Newton steps",
                            beta);
}

Eigen::VectorXd mple(const SurvivalDataset& data, const NewtonOptions& options, Ties ties) {
  return mple(data, Eigen::VectorXd::Zero(data.p()), options, ties);
}

}  // namespace coxgibbs
