#include "coxgibbs/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>

#include "coxgibbs/diagnostics.hpp"
#include "coxgibbs/errors.hpp"
#include "coxgibbs/metropolis.hpp"
#include "coxgibbs/random.hpp"

namespace coxgibbs {

SamplerKind parse_sampler(std::string_view name) {
  if (name == "gs4cox") return SamplerKind::gs4cox;
  if (name == "mh") return SamplerKind::mh;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected gs4cox or mh)");
}

std::string_view to_string(SamplerKind kind) { return kind == SamplerKind::gs4cox ? "gs4cox" : "mh"; }

Chain fit_chain(const SurvivalDataset& data, SamplerKind kind, const FitConfig& cfg, Ties ties) {
  if (kind == SamplerKind::mh) return run_mh(data, cfg, ties).chain;
  const PairContrasts pairs = build_pair_contrasts(data);
  return correct(run_gibbs(pairs, cfg), data, ties);
}

void GpcConfig::validate() const {
  if (bootstrap_count < 1) throw std::invalid_argument("gpc: bootstrap count must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("gpc: alpha must be in (0, 1)");
  if (!(tol > 0.0)) throw std::invalid_argument("gpc: tol must be > 0");
  if (max_rounds < 1) throw std::invalid_argument("gpc: max rounds must be >= 1");
  if (threads < 0) throw std::invalid_argument("gpc: threads must be >= 0");
  if (!(max_drop_fraction >= 0.0 && max_drop_fraction < 1.0)) {
    throw std::invalid_argument("gpc: max drop fraction must be in [0, 1)");
  }
}

double gpc_update(double w, double coverage, double alpha, int round) {
  if (round < 1) throw std::invalid_argument("gpc_update: rounds are numbered from 1");
  const double next = w + (coverage - (1.0 - alpha)) / static_cast<double>(round);
  return std::clamp(next, kMinLearningRate, kMaxLearningRate);
}

bool credible_region_contains(const Chain& chain, double alpha, const Eigen::VectorXd& point) {
  if (point.size() != chain.p()) throw std::invalid_argument("credible region: dimension mismatch");
  const double per_coord = alpha / static_cast<double>(chain.p());
  const Eigen::MatrixXd kept = chain.kept_samples();
  std::vector<double> col(static_cast<std::size_t>(kept.rows()));
  for (Index k = 0; k < chain.p(); ++k) {
    for (Index r = 0; r < kept.rows(); ++r) col[static_cast<std::size_t>(r)] = kept(r, k);
    std::sort(col.begin(), col.end());
    const double lo = quantile_sorted(col, 0.5 * per_coord);
    const double hi = quantile_sorted(col, 1.0 - 0.5 * per_coord);
    if (point[k] < lo || point[k] > hi) return false;
  }
  return true;
}

namespace {

struct ReplicateOutcome {
  std::optional<bool> covered;
  std::string error;
};

ReplicateOutcome run_replicate(const SurvivalDataset& data, SamplerKind kind, const GpcConfig& cfg, double w,
                               int round, int replicate, const Eigen::VectorXd& target) {
  const auto r = static_cast<std::uint64_t>(round);
  const auto b = static_cast<std::uint64_t>(replicate);
  Rng rng(cfg.seed, {r, b, 0});
  std::vector<Index> rows(static_cast<std::size_t>(data.n()));
  for (auto& i : rows) i = static_cast<Index>(rng.index(static_cast<std::uint64_t>(data.n())));

  FitConfig fit = cfg.inner_fit;
  fit.learning_rate = w;
  fit.seed = derive_seed(cfg.seed, {r, b, 1});
  fit.threads = 0;
  ReplicateOutcome out;
  try {
    const SurvivalDataset boot = data.select_rows(rows);
    const Chain chain = fit_chain(boot, kind, fit, cfg.ties);
    if (kind == SamplerKind::gs4cox && !chain.corrected) throw NumericalError(chain.diagnostic);
    out.covered = credible_region_contains(chain, cfg.alpha, target);
  } catch (const std::exception& e) {
    out.error = "round " + std::to_string(round) + ", replicate " + std::to_string(replicate) + ": " + e.what();
  }
  return out;
}

}  // namespace

GpcResult calibrate(const SurvivalDataset& data, SamplerKind kind, const GpcConfig& cfg) {
  cfg.validate();
  cfg.inner_fit.validate(data.p());

  GpcResult result;
  result.target = mple(data, NewtonOptions{}, cfg.ties);
  double w = cfg.inner_fit.learning_rate;
  const double nominal = 1.0 - cfg.alpha;

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.bootstrap_count));
  const int workers = std::min(std::max(cfg.threads, 1), cfg.bootstrap_count);

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    auto work = [&](int first) {
      for (int b = first; b < cfg.bootstrap_count; b += workers) {
        outcomes[static_cast<std::size_t>(b)] = run_replicate(data, kind, cfg, w, round, b, result.target);
      }
    };
    if (workers <= 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < workers; ++t) pool.emplace_back(work, t);
    }

    int used = 0, covered = 0;
    for (const auto& o : outcomes) {
      if (o.covered) {
        ++used;
        covered += *o.covered ? 1 : 0;
      } else {
        result.dropped.push_back(o.error);
      }
    }
    const int dropped = cfg.bootstrap_count - used;
    if (used == 0 || dropped > cfg.max_drop_fraction * cfg.bootstrap_count) {
      throw CalibrationError("gpc: " + std::to_string(dropped) + " of " + std::to_string(cfg.bootstrap_count) +
                             " bootstrap fits failed in round " + std::to_string(round) +
                             (result.dropped.empty() ? std::string() : "; last: " + result.dropped.back()));
    }

    GpcRound entry;
    entry.round = round;
    entry.w = w;
    entry.coverage = static_cast<double>(covered) / used;
    entry.replicates_used = used;
    if (std::fabs(entry.coverage - nominal) <= cfg.tol) {
      entry.next_w = w;
      result.trace.push_back(entry);
      result.converged = true;
      break;
    }
    entry.next_w = gpc_update(w, entry.coverage, cfg.alpha, round);
    result.trace.push_back(entry);
    w = entry.next_w;
  }
  result.w = w;
  return result;
}

}  // namespace coxgibbs
