#pragma once

#include <cstddef>
#include <span>

#include "coxgibbs/random.hpp"

namespace coxgibbs {

/// A single Polya-Gamma variate; always strictly positive.
struct PgDraw {
  double value;
};

/// Exact draw from PG(1, c) by the alternating-series rejection method
/// (Devroye-style proposal mixing a truncated exponential tail and a
/// truncated inverse-Gaussian body, truncation point 0.64).
///
/// The law depends on c only through |c|. Throws std::invalid_argument for
/// non-finite c. When `attempts` is non-null it receives the number of outer
/// proposals consumed.
PgDraw sample_pg1(double c, Rng& rng, int* attempts = nullptr);

/// Fills out[q] ~ PG(1, tilts[q]) sequentially from `rng`.
void sample_pg1(std::span<const double> tilts, std::span<double> out, Rng& rng);

/// E[PG(1, c)] = tanh(c/2) / (2c), 1/4 at c = 0.
double pg1_mean(double c);

/// Var[PG(1, c)] = (sinh c - c) / (4 c^3 cosh^2(c/2)), 1/24 at c = 0.
double pg1_variance(double c);

}  // namespace coxgibbs
