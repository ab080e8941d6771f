#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace kincal {

// splitmix64 step; decorrelates derived seeds even for adjacent inputs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for one named stream of an experiment: hash(master, tag, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index) {
    std::uint64_t h = splitmix64(master);
    for (char c : tag)
        h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return splitmix64(h ^ splitmix64(index));
}

// Deterministic random stream. mt19937_64 output is pinned by the standard;
// the uniform/normal transforms below consume a fixed number of engine draws,
// so a stream is reproducible from its seed alone.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    // [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (exactly two engine draws per call)
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace kincal
