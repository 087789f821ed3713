#ifndef LWEAK_RNG_HPP_
#define LWEAK_RNG_HPP_

#include <cstdint>
#include <random>

namespace lweak {

// std::mt19937_64 has a fully specified output sequence, so every draw below
// is reproducible across compilers. The std:: distributions are not, which is
// why the conversions to doubles are written out by hand.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent per-replicate seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for replicate `index` of a run started from `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
  return mix_seed(mix_seed(seed) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine &engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform on the open interval (-1, 1), symmetric about zero.
inline double uniform_pm1(Engine &engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-52 - 1.0;
}

inline bool coin(Engine &engine) { return (engine() >> 63) != 0; }

}  // namespace lweak

#endif  // LWEAK_RNG_HPP_
