#include "coxgibbs/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "coxgibbs/errors.hpp"
#include "coxgibbs/polya_gamma.hpp"
#include "coxgibbs/random.hpp"

namespace coxgibbs {

PriorSpec PriorSpec::isotropic(Index p, double variance, double mean) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("prior variance must be positive and finite");
  }
  return PriorSpec{Eigen::VectorXd::Constant(p, mean), variance * Eigen::MatrixXd::Identity(p, p)};
}

void PriorSpec::validate(Index p) const {
  if (mean.size() != p || covariance.rows() != p || covariance.cols() != p) {
    throw std::invalid_argument("prior: dimensions do not match P = " + std::to_string(p));
  }
  if (!mean.allFinite() || !covariance.allFinite()) throw std::invalid_argument("prior: non-finite entries");
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw std::invalid_argument("prior: covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("prior: covariance is not positive definite");
}

Eigen::MatrixXd PriorSpec::precision() const {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  return llt.solve(Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols()));
}

void FitConfig::validate(Index p) const {
  if (iterations < 1) throw std::invalid_argument("fit: iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) throw std::invalid_argument("fit: burn-in must satisfy 0 <= m* < M");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("fit: learning rate must be > 0");
  }
  if (threads < 0) throw std::invalid_argument("fit: threads must be >= 0");
  resolved_prior(p).validate(p);
  if (init && (init->size() != p || !init->allFinite())) {
    throw std::invalid_argument("fit: initial beta has wrong dimension or non-finite entries");
  }
}

PriorSpec FitConfig::resolved_prior(Index p) const {
  if (prior.mean.size() == 0 && prior.covariance.size() == 0) return PriorSpec::isotropic(p, 100.0);
  return prior;
}

Eigen::VectorXd FitConfig::resolved_init(Index p) const { return init ? *init : Eigen::VectorXd::Zero(p); }

Eigen::VectorXd Chain::posterior_mean() const {
  if (kept() < 1) throw std::invalid_argument("chain has no post-burn-in samples");
  return samples.bottomRows(kept()).colwise().mean().transpose();
}

Eigen::MatrixXd GaussianConditional::covariance() const {
  return factor.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
}

GaussianConditional gaussian_conditional(const PairContrasts& pairs, std::span<const double> omega,
                                         const PriorSpec& prior, double learning_rate) {
  if (static_cast<Index>(omega.size()) != pairs.size()) {
    throw std::invalid_argument("gaussian_conditional: omega has wrong length");
  }
  const Index p = pairs.p();
  prior.validate(p);
  const Eigen::MatrixXd prior_precision = prior.precision();
  Eigen::Map<const Eigen::VectorXd> w(omega.data(), static_cast<Index>(omega.size()));
  GaussianConditional out;
  const Eigen::MatrixXd weighted = pairs.contrasts.array().colwise() * w.array();
  out.precision = prior_precision + learning_rate * (pairs.contrasts.transpose() * weighted);
  out.rhs = prior_precision * prior.mean +
            0.5 * learning_rate * pairs.contrasts.colwise().sum().transpose();
  out.factor.compute(out.precision);
  if (out.factor.info() != Eigen::Success) {
    throw NumericalError("conditional precision is not positive definite");
  }
  out.mean = out.factor.solve(out.rhs);
  return out;
}

GibbsSampler::GibbsSampler(const PairContrasts& pairs, const FitConfig& cfg) : pairs_(pairs), cfg_(cfg) {
  const Index p = pairs.p();
  if (pairs.size() < 1) throw EmptyPairsError("Gibbs sampler needs at least one pair");
  cfg_.validate(p);
  const PriorSpec prior = cfg_.resolved_prior(p);
  prior_precision_ = prior.precision();
  // kappa = 1/2 for every pair, so the linear term never changes.
  rhs_ = prior_precision_ * prior.mean +
         0.5 * cfg_.learning_rate * pairs.contrasts.colwise().sum().transpose();
  blocks_ = (pairs.size() + kBlockSize - 1) / kBlockSize;
  eta_.resize(static_cast<std::size_t>(pairs.size()));
  omega_.resize(static_cast<std::size_t>(pairs.size()));
  block_scatter_.assign(static_cast<std::size_t>(blocks_), Eigen::MatrixXd::Zero(p, p));
}

void GibbsSampler::process_block(const Eigen::VectorXd& beta, std::uint64_t sweep_index, Index block) {
  const Index start = block * kBlockSize;
  const Index len = std::min(kBlockSize, pairs_.size() - start);
  const auto rows = pairs_.contrasts.middleRows(start, len);

  Eigen::Map<Eigen::VectorXd> eta(eta_.data() + start, len);
  eta.noalias() = rows * beta;
  Rng rng(cfg_.seed, {sweep_index, static_cast<std::uint64_t>(block)});
  double* omega = omega_.data() + start;
  for (Index k = 0; k < len; ++k) omega[k] = sample_pg1(eta[k], rng).value;

  // sum_q omega_q d_q d_q' as a rank-len update with rows scaled by sqrt(omega).
  Eigen::Map<const Eigen::VectorXd> om(omega, len);
  const Eigen::MatrixXd scaled = (rows.array().colwise() * om.array().sqrt()).matrix();
  auto& scatter = block_scatter_[static_cast<std::size_t>(block)];
  scatter.setZero();
  scatter.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
}

Eigen::VectorXd GibbsSampler::sweep(const Eigen::VectorXd& beta, std::uint64_t sweep_index) {
  const int workers = std::min<Index>(std::max(cfg_.threads, 1), blocks_);
  if (workers <= 1) {
    for (Index b = 0; b < blocks_; ++b) process_block(beta, sweep_index, b);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (Index b = t; b < blocks_; b += workers) process_block(beta, sweep_index, b);
      });
    }
  }

  const Index p = pairs_.p();
  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(p, p);
  for (const auto& s : block_scatter_) precision += s;
  precision *= cfg_.learning_rate;
  precision += prior_precision_;
  precision = precision.selfadjointView<Eigen::Lower>();

  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Gibbs update: conditional precision lost positive definiteness");
  }
  const Eigen::VectorXd mean = llt.solve(rhs_);
  Rng rng(cfg_.seed, {sweep_index, kBetaStream});
  Eigen::VectorXd z(p);
  for (Index k = 0; k < p; ++k) z[k] = rng.normal();
  // precision = L L', so L'^-1 z has covariance precision^-1.
  Eigen::VectorXd draw = mean + llt.matrixU().solve(z);
  if (!draw.allFinite()) throw NumericalError("Gibbs update produced a non-finite draw");
  return draw;
}

Chain GibbsSampler::run() {
  const Index p = pairs_.p();
  Chain chain;
  chain.samples.resize(cfg_.iterations, p);
  chain.burn_in = cfg_.burn_in;
  chain.seed = cfg_.seed;
  Eigen::VectorXd beta = cfg_.resolved_init(p);
  const auto start = std::chrono::steady_clock::now();
  for (int m = 0; m < cfg_.iterations; ++m) {
    beta = sweep(beta, static_cast<std::uint64_t>(m));
    chain.samples.row(m) = beta.transpose();
  }
  chain.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return chain;
}

Eigen::VectorXd gibbs_sweep(const PairContrasts& pairs, const Eigen::VectorXd& beta, const FitConfig& cfg,
                            std::uint64_t sweep_index) {
  GibbsSampler sampler(pairs, cfg);
  return sampler.sweep(beta, sweep_index);
}

Chain run_gibbs(const PairContrasts& pairs, const FitConfig& cfg) { return GibbsSampler(pairs, cfg).run(); }

Chain correct(const Chain& chain, const SurvivalDataset& data, Ties ties) {
  if (chain.corrected) throw std::invalid_argument("correct: chain is already corrected");
  if (chain.p() != data.p()) throw std::invalid_argument("correct: chain and data disagree on P");
  if (chain.kept() < 1) throw std::invalid_argument("correct: burn-in must be shorter than the chain");

  Chain out = chain;
  const Eigen::VectorXd center = chain.posterior_mean();
  try {
    const ScoreHessian sh = PartialLikelihood(data, ties).score_hessian(center);
    const Eigen::MatrixXd info = -sh.hessian;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-13 || (ldlt.vectorD().array() <= 0.0).any()) {
      throw SingularHessianError("partial-likelihood Hessian is singular at the posterior mean");
    }
    // -H^-1 S = (-H)^-1 S
    const Eigen::VectorXd shift = ldlt.solve(sh.score);
    if (!shift.allFinite()) throw NumericalError("correction term is not finite");
    out.samples.rowwise() += shift.transpose();
    out.corrected = true;
    out.correction = shift;
  } catch (const Error& e) {
    out.diagnostic = std::string("correction skipped: ") + e.what();
  }
  return out;
}

}  // namespace coxgibbs
