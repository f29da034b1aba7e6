#include "coxgibbs/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "coxgibbs/random.hpp"

namespace coxgibbs {

void SynthConfig::validate() const {
  if (n < 2) throw std::invalid_argument("synth: n must be >= 2");
  if (beta0.size() < 1) throw std::invalid_argument("synth: beta0 must have at least one entry");
  if (!beta0.allFinite()) throw std::invalid_argument("synth: beta0 must be finite");
  if (!(rounding >= 0.0) || !std::isfinite(rounding)) {
    throw std::invalid_argument("synth: rounding must be >= 0");
  }
  if (!(censor_rate > 0.0) || !std::isfinite(censor_rate)) {
    throw std::invalid_argument("synth: censor_rate must be > 0");
  }
}

SurvivalDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const Index p = cfg.beta0.size();
  Rng rng(cfg.seed);

  Eigen::MatrixXd x(cfg.n, p);
  Eigen::VectorXd t(cfg.n);
  Eigen::VectorXi delta(cfg.n);
  for (Index i = 0; i < cfg.n; ++i) {
    for (Index k = 0; k < p; ++k) x(i, k) = rng.normal();
    const double rate = std::exp(x.row(i).dot(cfg.beta0));
    const double event_time = rng.exponential() / rate;
    const double censor_time = rng.exponential() / cfg.censor_rate;
    delta[i] = event_time <= censor_time ? 1 : 0;
    double observed = std::min(event_time, censor_time);
    if (cfg.rounding > 0.0) observed = std::nearbyint(observed / cfg.rounding) * cfg.rounding;
    t[i] = observed;
  }
  return SurvivalDataset(std::move(t), std::move(delta), std::move(x));
}

}  // namespace coxgibbs
