#pragma once

#include <cstddef>
#include <cstdint>

namespace pqt {

/// Squared Euclidean distance between two dim-dimensional float vectors.
/// Plain float accumulation; parts are short enough that this is exact
/// to working precision and it keeps results bit-identical across runs.
inline float l2_sq(const float* a, const float* b, std::size_t dim) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < dim; ++i) {
        float d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline float dot(const float* a, const float* b, std::size_t dim) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < dim; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

/// splitmix64 step; used to derive independent sub-seeds deterministically.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0x94d049bb133111ebULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace pqt
