#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace rangeland {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Order-sensitive combination of stream keys.
constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a + 0x9E3779B97F4A7C15ULL + mix64(b ^ 0xD1B54A32D192ED03ULL));
}

/// Counter-based random stream: draw n of stream `key` is a pure function
/// of (key, n), so any draw can be reproduced without replaying the
/// stream and parallel workers never share state.
class RngStream {
public:
  constexpr RngStream() = default;
  constexpr explicit RngStream(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }
  constexpr void seek(std::uint64_t counter) noexcept { counter_ = counter; }

  static constexpr std::uint64_t bits_at(std::uint64_t key, std::uint64_t counter) noexcept {
    return mix64(mix64(key) ^ (counter * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
  }

  /// Uniform on the open interval (0, 1).
  static constexpr double uniform_at(std::uint64_t key, std::uint64_t counter) noexcept {
    return (static_cast<double>(bits_at(key, counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t next_bits() noexcept { return bits_at(key_, counter_++); }
  double uniform() noexcept { return uniform_at(key_, counter_++); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  /// Two independent standard normals (Box-Muller).
  std::pair<double, double> normal_pair() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

  double normal() noexcept { return normal_pair().first; }

private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Log-space parameters of a lognormal with the given arithmetic mean and
/// standard deviation.
struct LogNormalMoments {
  double mu = 0.0;
  double sigma = 0.0;

  static LogNormalMoments from_mean_sd(double mean, double sd) noexcept {
    const double cv2 = (sd / mean) * (sd / mean);
    const double s2 = std::log1p(cv2);
    return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
  }

  double sample(double z) const noexcept { return std::exp(mu + sigma * z); }
};

/// Unit-mean lognormal multiplier with coefficient of variation `cv`.
inline double unit_lognormal(double cv, double z) noexcept {
  if (cv <= 0.0) return 1.0;
  const double s2 = std::log1p(cv * cv);
  return std::exp(std::sqrt(s2) * z - 0.5 * s2);
}

} // namespace rangeland
