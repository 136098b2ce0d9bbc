#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace kendep {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed of substream `index` under `master`. Independent of how replicates
// are scheduled across threads.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Engine make_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Engine(seq);
}

inline Engine make_engine(std::uint64_t master, std::uint64_t index) {
    return make_engine(derive_seed(master, index));
}

// Uniform on the open interval (0,1); never returns 0 or 1.
inline double uniform_open(Engine& g) {
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal(Engine& g) {
    std::normal_distribution<double> z(0.0, 1.0);
    return z(g);
}

inline double standard_exponential(Engine& g) {
    return -std::log(uniform_open(g));
}

} // namespace kendep
