#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace vrsg {

struct LipschitzInfo;

/// SplitMix64 (Steele, Lea, Flood 2014): a 64-bit counter-based generator.
/// Output k depends only on (seed, k), so streams are cheap to split and
/// reproducible across platforms. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Independent child stream; advances this stream by one draw.
  SplitMix64 split() noexcept { return SplitMix64((*this)() ^ 0x5851f42d4c957f2dULL); }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

enum class SamplingMode { Uniform, LipschitzProportional };

/// Probability vector over components with its cumulative table and a seeded
/// stream. Single-owner: draw() mutates the stream.
class SamplingDistribution {
 public:
  SamplingDistribution(std::vector<double> p, std::uint64_t seed);

  std::size_t size() const noexcept { return p_.size(); }
  const std::vector<double>& probabilities() const noexcept { return p_; }
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  double p(std::size_t i) const { return p_[i]; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draw_count() const noexcept { return draws_; }

  std::size_t draw();
  // Inverse-CDF lookup: the i with cumulative[i-1] <= u < cumulative[i].
  std::size_t index_for(double u) const;

 private:
  std::vector<double> p_;
  std::vector<double> cumulative_;
  std::uint64_t seed_;
  SplitMix64 rng_;
  std::uint64_t draws_ = 0;
};

inline constexpr double kDegenerateFloor = 1e-12;

SamplingDistribution build_distribution(SamplingMode mode, const LipschitzInfo& info,
                                        std::uint64_t seed);

}  // namespace vrsg
