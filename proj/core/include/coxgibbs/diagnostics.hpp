#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coxgibbs/gibbs.hpp"

namespace coxgibbs {

/// Biased (1/N) autocovariance at lags 0..N-1 of the demeaned series,
/// computed with a zero-padded FFT.
Eigen::VectorXd autocovariance(std::span<const double> series);

/// ESS of one series: N / (1 + 2 sum_l rho(l)) with the sum truncated by
/// Geyer's initial positive sequence, capped at 1.05 N. Throws
/// EssUndefinedError for a constant series.
double effective_sample_size(std::span<const double> series);

struct EssResult {
  Eigen::VectorXd per_param;
  double average = 0.0;  ///< (1/P) sum_p ESS_p
};

/// ESS of every coordinate over the post-burn-in draws (needs >= 10).
EssResult ess(const Chain& chain);

struct ChainSummary {
  Eigen::VectorXd posterior_mean;
  Eigen::VectorXd credible_lo;
  Eigen::VectorXd credible_hi;
  bool ess_defined = true;
  Eigen::VectorXd ess_per_param;  ///< NaN when undefined
  double ess_avg = 0.0;
  double esr = 0.0;               ///< ess_avg / wall_seconds
  std::vector<Eigen::VectorXd> autocorr;  ///< rho_p(l), l = 0..min(N-1, kMaxReportedLag)
  std::string note;

  static constexpr Index kMaxReportedLag = 100;
};

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double prob);

/// Posterior mean, equal-tailed (alpha/2, 1 - alpha/2) percentile intervals
/// and ESS/ESR over the post-burn-in draws (needs >= 20). A constant
/// coordinate leaves the ESS fields undefined instead of failing.
ChainSummary summarize(const Chain& chain, double alpha = 0.05);

}  // namespace coxgibbs
