#pragma once

#include <cstdint>
#include <random>

namespace msoc {

/// splitmix64; used to derive independent per-path seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return splitmix64(s);
}

using Rng = std::mt19937_64;

/// Pairwise (cascade) summation; order-independent accumulation so that
/// multi-threaded path batches reduce to a deterministic total.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace msoc
