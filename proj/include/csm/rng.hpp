#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace csm {

// Random streams are std::mt19937_64 with our own uniform and Gaussian
// transforms. Changing anything here changes every seeded result.
inline constexpr const char *kRngName = "mt19937_64+splitmix64/box-muller v1";

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for substream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Uniform double on [0, 1) with 53 random bits.
double uniform01(Engine &engine) noexcept;

/// Standard complex Gaussian: real and imaginary parts independent N(0, 1).
std::complex<double> complex_normal(Engine &engine) noexcept;

}  // namespace csm
