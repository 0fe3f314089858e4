#pragma once

#include <cstdint>
#include <random>

namespace sohkit {

/// Stateless 64-bit mixer; used for counter-based draws that must not depend
/// on evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(a) ^ b);
}

/// 53 random bits -> [0, 1); identical on every platform.
inline double uniform01(std::mt19937_64& gen) {
    return double(gen() >> 11) * 0x1p-53;
}

}  // namespace sohkit
