#include "coxgibbs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "coxgibbs/errors.hpp"

namespace coxgibbs {

Eigen::VectorXd autocovariance(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n == 0) throw std::invalid_argument("autocovariance: empty series");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  std::vector<double> padded(len, 0.0);
  for (std::size_t t = 0; t < n; ++t) padded[t] = series[t] - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (auto& c : spectrum) c = std::norm(c);
  std::vector<double> acov;
  fft.inv(acov, spectrum);

  Eigen::VectorXd out(static_cast<Index>(n));
  for (std::size_t l = 0; l < n; ++l) out[static_cast<Index>(l)] = acov[l] / static_cast<double>(n);
  return out;
}

namespace {

bool is_constant(std::span<const double> series) {
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  return *lo == *hi;
}

Eigen::VectorXd autocorrelation(std::span<const double> series) {
  Eigen::VectorXd acov = autocovariance(series);
  if (!(acov[0] > 0.0)) throw EssUndefinedError("ESS undefined: series has zero variance");
  return acov / acov[0];
}

double ess_from_rho(const Eigen::VectorXd& rho) {
  const Index n = rho.size();
  // Initial positive sequence: Gamma_k = rho(2k) + rho(2k+1) while > 0.
  double tau = -1.0;
  for (Index k = 0; 2 * k + 1 < n; ++k) {
    const double gamma = rho[2 * k] + rho[2 * k + 1];
    if (!(gamma > 0.0)) break;
    tau += 2.0 * gamma;
  }
  const double cap = 1.05 * static_cast<double>(n);
  if (!(tau > 0.0)) return cap;
  return std::min(static_cast<double>(n) / tau, cap);
}

}  // namespace

double effective_sample_size(std::span<const double> series) {
  if (series.size() < 2) throw std::invalid_argument("effective_sample_size: need at least 2 draws");
  if (is_constant(series)) throw EssUndefinedError("ESS undefined: constant chain");
  return ess_from_rho(autocorrelation(series));
}

EssResult ess(const Chain& chain) {
  if (chain.kept() < 10) throw std::invalid_argument("ess: need at least 10 post-burn-in draws");
  const Eigen::MatrixXd kept = chain.kept_samples();
  EssResult out;
  out.per_param.resize(chain.p());
  for (Index k = 0; k < chain.p(); ++k) {
    const Eigen::VectorXd col = kept.col(k);
    out.per_param[k] = effective_sample_size(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
  }
  out.average = out.per_param.mean();
  return out;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile: probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ChainSummary summarize(const Chain& chain, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("summarize: alpha must be in (0, 1)");
  if (chain.kept() < 20) throw std::invalid_argument("summarize: need at least 20 post-burn-in draws");
  const Index p = chain.p();
  const Eigen::MatrixXd kept = chain.kept_samples();

  ChainSummary s;
  s.posterior_mean = kept.colwise().mean().transpose();
  s.credible_lo.resize(p);
  s.credible_hi.resize(p);
  s.ess_per_param = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> col(static_cast<std::size_t>(kept.rows()));
  for (Index k = 0; k < p; ++k) {
    for (Index r = 0; r < kept.rows(); ++r) col[static_cast<std::size_t>(r)] = kept(r, k);
    std::sort(col.begin(), col.end());
    s.credible_lo[k] = quantile_sorted(col, 0.5 * alpha);
    s.credible_hi[k] = quantile_sorted(col, 1.0 - 0.5 * alpha);

    const Eigen::VectorXd series = kept.col(k);
    std::span<const double> view(series.data(), static_cast<std::size_t>(series.size()));
    if (is_constant(view)) {
      s.ess_defined = false;
      s.autocorr.emplace_back();
      continue;
    }
    const Eigen::VectorXd rho = autocorrelation(view);
    s.ess_per_param[k] = ess_from_rho(rho);
    s.autocorr.emplace_back(rho.head(std::min<Index>(rho.size(), ChainSummary::kMaxReportedLag + 1)));
  }
  if (s.ess_defined) {
    s.ess_avg = s.ess_per_param.mean();
    s.esr = chain.wall_seconds > 0.0 ? s.ess_avg / chain.wall_seconds : std::numeric_limits<double>::infinity();
  } else {
    s.ess_avg = std::numeric_limits<double>::quiet_NaN();
    s.esr = std::numeric_limits<double>::quiet_NaN();
    s.note = "ESS undefined: at least one coordinate is constant after burn-in";
  }
  return s;
}

}  // namespace coxgibbs
