#include "coxgibbs/polya_gamma.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coxgibbs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTrunc = 0.64;
constexpr double kTruncRecip = 1.0 / kTrunc;

// log Phi(x), accurate in the lower tail.
double log_norm_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Mills-ratio expansion once erfc underflows.
  const double r = 1.0 / (x * x);
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * kPi) + std::log1p(-r + 3.0 * r * r - 15.0 * r * r * r);
}

// n-th coefficient of the alternating series for the J*(1) density, piecewise
// in x around the truncation point. log_x_term caches -1.5 log(pi x / 2).
double series_coef(int n, double x, double log_x_term) {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  return k * std::exp(log_x_term - 2.0 * (n + 0.5) * (n + 0.5) / x);
}

// Probability that the proposal comes from the exponential tail (x > t).
double tail_mass(double z, double fz) {
  const double t = kTrunc;
  const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
  const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
  const double x0 = std::log(fz) + fz * t;
  // Phi(b) is never tiny here (b >= -1.25), so only the a-term needs logs.
  const double pb = 0.5 * std::erfc(-b / std::numbers::sqrt2);
  const double xa = x0 + z + log_norm_cdf(a);
  const double q_over_p = 4.0 / kPi * (std::exp(x0 - z) * pb + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse-Gaussian(1/z, 1) truncated to (0, t).
double truncated_inv_gauss(double z, Rng& rng) {
  const double t = kTrunc;
  double x = t + 1.0;
  if (kTruncRecip > z) {
    // Mean beyond the truncation point: propose from 1/chi^2_1 restricted to (0, t).
    double accept = 0.0;
    do {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      x = 1.0 + e1 * t;
      x = t / (x * x);
      accept = std::exp(-0.5 * z * z * x);
    } while (rng.uniform() > accept);
  } else {
    const double mu = 1.0 / z;
    while (x > t) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace

PgDraw sample_pg1(double c, Rng& rng, int* attempts) {
  if (!std::isfinite(c)) throw std::invalid_argument("sample_pg1: tilt must be finite");
  // PG(1, c) = J*(1, |c|/2) / 4.
  const double z = 0.5 * std::fabs(c);
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double p_tail = tail_mass(z, fz);
  int tries = 0;
  for (;;) {
    ++tries;
    double x;
    if (rng.uniform() < p_tail) {
      x = kTrunc + rng.exponential() / fz;
    } else {
      x = truncated_inv_gauss(z, rng);
    }
    const double lx = x > kTrunc ? 0.0 : -1.5 * std::log(0.5 * kPi * x);
    double s = series_coef(0, x, lx);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_coef(n, x, lx);
        if (y <= s) {
          if (attempts) *attempts = tries;
          return PgDraw{0.25 * x};
        }
      } else {
        s += series_coef(n, x, lx);
        if (y > s) break;
      }
    }
  }
}

void sample_pg1(std::span<const double> tilts, std::span<double> out, Rng& rng) {
  if (tilts.size() != out.size()) throw std::invalid_argument("sample_pg1: size mismatch");
  for (std::size_t q = 0; q < tilts.size(); ++q) out[q] = sample_pg1(tilts[q], rng).value;
}

double pg1_mean(double c) {
  const double a = std::fabs(c);
  if (a < 1e-4) return 0.25 - a * a / 48.0;
  return std::tanh(0.5 * a) / (2.0 * a);
}

double pg1_variance(double c) {
  const double a = std::fabs(c);
  if (a < 1e-3) return 1.0 / 24.0 - a * a / 120.0;
  const double ch = std::cosh(0.5 * a);
  return (std::sinh(a) - a) / (4.0 * a * a * a * ch * ch);
}

}  // namespace coxgibbs
