#pragma once

#include <cmath>
#include <cstdint>

namespace tpqkd {

// Counter-based generator: sample i of stream s is a bijective hash of
// (seed, s, i). Streams can be handed to workers independently and any run is
// replayable bit-exactly from the recorded seed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed + 0x9e3779b97f4a7c15ull) ^ mix(stream ^ 0xd1b54a32d192ed03ull)) {}

    std::uint64_t next_u64() { return mix(key_ + kGamma * ++counter_); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n), n >= 1. Lemire reduction; the bias window is
    // unreachable for the n used here (n <= 64).
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller; second deviate cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * kPi * uniform();
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    // Poisson deviate, Knuth multiplication method. Fine for the mean photon
    // numbers used here (mu << 100 keeps exp(-mu) well above denormals).
    unsigned poisson(double mu) {
        if (mu <= 0.0) return 0;
        const double threshold = std::exp(-mu);
        unsigned k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > threshold);
        return k - 1;
    }

    std::uint64_t counter() const { return counter_; }

private:
    static constexpr double kPi = 3.14159265358979323846;
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace tpqkd
