#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace netcollapse {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a; used to fold scenario names into seeds.
inline constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Order-sensitive stable combination of seed components.
inline constexpr std::uint64_t combine_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Marginal family used when sampling matrix entries.
enum class Marginal { normal, uniform };

/// Maps a standard-normal draw to the requested marginal with the given mean/std.
inline double to_marginal(double z, double mean, double sd, Marginal m) {
  if (m == Marginal::uniform)
    return mean + sd * std::sqrt(3.0) * (2.0 * standard_normal_cdf(z) - 1.0);
  return mean + sd * z;
}

}  // namespace netcollapse
