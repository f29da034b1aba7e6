#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "coxgibbs/dataset.hpp"
#include "coxgibbs/gibbs.hpp"
#include "coxgibbs/partial_likelihood.hpp"

namespace coxgibbs {

enum class SamplerKind { gs4cox, mh };

SamplerKind parse_sampler(std::string_view name);
std::string_view to_string(SamplerKind kind);

/// Fits one chain with the chosen sampler. GS4Cox chains come back
/// corrected (when the correction succeeds); MH chains are returned as is.
Chain fit_chain(const SurvivalDataset& data, SamplerKind kind, const FitConfig& cfg, Ties ties);

struct GpcConfig {
  /// Inner chains of 600 sweeps with 200 burn-in.
  static FitConfig default_inner_fit() {
    FitConfig f;
    f.iterations = 600;
    f.burn_in = 200;
    return f;
  }

  int bootstrap_count = 100;  ///< B
  double alpha = 0.05;
  double tol = 0.001;         ///< stop when |coverage - (1 - alpha)| <= tol
  int max_rounds = 1000;
  /// Template for the inner fits; its learning_rate is the starting w.
  FitConfig inner_fit = default_inner_fit();
  std::uint64_t seed = 1;
  Ties ties = Ties::breslow;
  int threads = 0;
  double max_drop_fraction = 0.2;

  void validate() const;
};

struct GpcRound {
  int round = 0;        ///< k', from 1
  double w = 0.0;       ///< learning rate used in this round
  double coverage = 0.0;
  int replicates_used = 0;
  double next_w = 0.0;  ///< equals w when the round met the tolerance
};

struct GpcResult {
  double w = 0.0;
  bool converged = false;
  Eigen::VectorXd target;  ///< MPLE on the original data
  std::vector<GpcRound> trace;
  std::vector<std::string> dropped;  ///< one message per failed replicate
};

inline constexpr double kMinLearningRate = 1e-4;
inline constexpr double kMaxLearningRate = 1e3;

/// w + (coverage - (1 - alpha)) / round, clamped to [1e-4, 1e3].
double gpc_update(double w, double coverage, double alpha, int round);

/// Joint credible region: the product of per-coordinate equal-tailed
/// intervals at level 1 - alpha / P over the post-burn-in draws.
bool credible_region_contains(const Chain& chain, double alpha, const Eigen::VectorXd& point);

/// Generalized posterior calibration of the learning rate. Each round
/// resamples B bootstrap datasets (streams keyed by (seed, round,
/// replicate)), fits the sampler at the current w, and moves w by a
/// Robbins-Monro step toward nominal coverage of the original-data MPLE.
/// Failed replicates are dropped; more than max_drop_fraction of B failing
/// in a round throws CalibrationError.
GpcResult calibrate(const SurvivalDataset& data, SamplerKind kind, const GpcConfig& cfg);

}  // namespace coxgibbs
