#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace past {

/// All randomness flows through explicitly passed engines of this type.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Derives an independent stream seed from a base seed and a path of indices,
/// e.g. derive_seed(base, {sweep_index, trial_index}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

/// Draws a fresh 64-bit seed from `rng` and returns an engine seeded with it.
Rng split(Rng& rng);

double uniform01(Rng& rng);
double standard_normal(Rng& rng);
bool bernoulli(Rng& rng, double p);

}  // namespace past
