#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace coxgibbs {

/// Seedable random stream.
///
/// The engine is std::mt19937_64 seeded through std::seed_seq, both of which
/// the C++ standard specifies bit-for-bit. The variate transforms below are
/// implemented here rather than taken from <random>, whose distributions are
/// implementation-defined, so a seed reproduces the same draws on every
/// conforming toolchain.
///
/// Sub-streams are derived by feeding (seed, id...) into the seed sequence;
/// parallel work partitions each own a stream keyed by their coordinates.
///
/// Stream format version: 1. Changing any transform below must bump
/// kStreamVersion, which is recorded in run manifests.
class Rng {
 public:
  static constexpr int kStreamVersion = 1;

  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_ids);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// Exponential with rate 1.
  double exponential();

  /// Uniform integer in [0, n). Unbiased (rejection on the top range).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Mixes a seed and stream coordinates into a new 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_ids);

}  // namespace coxgibbs
