#pragma once

#include <cstdint>
#include <random>

namespace lnainfer {

// 64-bit Mersenne Twister. Its output sequence is fixed by the C++ standard,
// and all distributions below come from Boost.Random, whose algorithms do not
// vary between standard libraries, so seeded runs are portable.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream `stream` derived from a run seed: the engine is seeded
/// with splitmix64(seed + stream). Stream 0 is the master stream; per-cell
/// streams use 1 + cell index.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

double uniform01(Rng& rng);          // (0, 1)
double standard_normal(Rng& rng);
double exponential(Rng& rng, double rate);
double gamma_shape_scale(Rng& rng, double shape, double scale);

}  // namespace lnainfer
