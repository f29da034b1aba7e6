#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "coxgibbs/dataset.hpp"

namespace coxgibbs {

struct SynthConfig {
  Index n = 300;
  Eigen::VectorXd beta0;      ///< true coefficients, length P
  double rounding = 0.0;      ///< round observed times to multiples of this; 0 disables
  double censor_rate = 1.0;   ///< rate of the exponential censoring time
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument when n < 2, beta0 is empty or non-finite,
  /// rounding < 0 or censor_rate <= 0.
  void validate() const;
};

/// Exponential proportional-hazards data: X ~ N(0, I),
/// T* ~ Exp(exp(X'beta0)), C* ~ Exp(censor_rate), T = min(T*, C*) (optionally
/// rounded half-to-even on T / r), delta = 1{T* <= C*}.
///
/// Draw order per subject is X (P normals), T*, C*, all from Rng(seed).
SurvivalDataset generate(const SynthConfig& cfg);

}  // namespace coxgibbs
