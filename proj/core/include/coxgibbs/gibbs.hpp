#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "coxgibbs/dataset.hpp"
#include "coxgibbs/partial_likelihood.hpp"

namespace coxgibbs {

/// Gaussian prior N(mean, covariance) on beta.
struct PriorSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  /// N(mean * 1, variance * I).
  static PriorSpec isotropic(Index p, double variance, double mean = 0.0);

  /// Throws std::invalid_argument unless sizes match p and the covariance is
  /// symmetric positive definite.
  void validate(Index p) const;
  Eigen::MatrixXd precision() const;
};

struct FitConfig {
  int iterations = 1000;       ///< M
  int burn_in = 500;           ///< m*, 0 <= m* < M
  double learning_rate = 1.0;  ///< w > 0
  std::uint64_t seed = 1;
  /// Empty prior means N(0, 100 I).
  PriorSpec prior;
  /// Starting point; zero when unset.
  std::optional<Eigen::VectorXd> init;
  /// Worker threads for the pair blocks of a sweep; 0 or 1 runs inline.
  /// Results do not depend on this value.
  int threads = 0;

  void validate(Index p) const;
  PriorSpec resolved_prior(Index p) const;
  Eigen::VectorXd resolved_init(Index p) const;
};

/// Draws from a sampler. Row m holds beta^(m+1); beta^(0) is not stored.
struct Chain {
  Eigen::MatrixXd samples;
  int burn_in = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;  ///< sampling loop only
  bool corrected = false;
  std::optional<Eigen::VectorXd> correction;
  std::string diagnostic;

  Index length() const noexcept { return samples.rows(); }
  Index p() const noexcept { return samples.cols(); }
  Index kept() const noexcept { return length() - burn_in; }
  /// Post-burn-in rows.
  Eigen::MatrixXd kept_samples() const { return samples.bottomRows(kept()); }
  /// Mean of the post-burn-in rows.
  Eigen::VectorXd posterior_mean() const;
};

/// Complete conditional of beta given the Polya-Gamma latents:
/// precision = S0^-1 + w sum_q omega_q d_q d_q', and
/// mean = precision^-1 (S0^-1 mu0 + (w/2) sum_q d_q).
struct GaussianConditional {
  Eigen::MatrixXd precision;
  Eigen::VectorXd rhs;
  Eigen::VectorXd mean;
  Eigen::LLT<Eigen::MatrixXd> factor;

  Eigen::MatrixXd covariance() const;
};

GaussianConditional gaussian_conditional(const PairContrasts& pairs, std::span<const double> omega,
                                         const PriorSpec& prior, double learning_rate);

/// GS4Cox sampler over precomputed pair contrasts.
///
/// Pairs are processed in fixed blocks of kBlockSize rows. Block b of sweep s
/// draws its latents from Rng(seed, {s, b}) and the beta update uses
/// Rng(seed, {s, kBetaStream}); block scatter matrices are summed in block
/// order. The output is therefore identical for every thread count.
class GibbsSampler {
 public:
  static constexpr Index kBlockSize = 4096;
  static constexpr std::uint64_t kBetaStream = ~std::uint64_t{0};

  /// `pairs` must outlive the sampler.
  GibbsSampler(const PairContrasts& pairs, const FitConfig& cfg);

  /// One full sweep: eta = D beta, omega ~ PG(1, eta), beta' ~ N(mean, precision^-1).
  Eigen::VectorXd sweep(const Eigen::VectorXd& beta, std::uint64_t sweep_index);

  /// M sweeps from the configured start (uncorrected chain).
  Chain run();

  /// Latents of the most recent sweep.
  std::span<const double> last_omega() const { return omega_; }

 private:
  void process_block(const Eigen::VectorXd& beta, std::uint64_t sweep_index, Index block);

  const PairContrasts& pairs_;
  FitConfig cfg_;
  Eigen::MatrixXd prior_precision_;
  Eigen::VectorXd rhs_;  ///< S0^-1 mu0 + (w/2) sum_q d_q, fixed for the run
  Index blocks_;
  std::vector<double> eta_;
  std::vector<double> omega_;
  std::vector<Eigen::MatrixXd> block_scatter_;
};

/// Single sweep with a fresh sampler; convenience for tests and callers that
/// drive the chain themselves.
Eigen::VectorXd gibbs_sweep(const PairContrasts& pairs, const Eigen::VectorXd& beta, const FitConfig& cfg,
                            std::uint64_t sweep_index);

/// Runs M sweeps and returns the uncorrected chain.
Chain run_gibbs(const PairContrasts& pairs, const FitConfig& cfg);

/// Finite-sample correction: shift every row (burn-in included) by
/// -H_PL(b)^-1 S_PL(b), b the post-burn-in mean. If the Hessian is singular
/// at b the chain comes back uncorrected with `diagnostic` set.
Chain correct(const Chain& chain, const SurvivalDataset& data, Ties ties = Ties::breslow);

}  // namespace coxgibbs
