#pragma once

#include <cstdint>
#include <vector>

namespace pathlet {

/// splitmix64: tiny deterministic generator with stable output across
/// platforms, unlike the distribution adaptors in <random>.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [lo, hi] via rejection sampling.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        if (hi <= lo) return lo;
        std::uint64_t range = hi - lo + 1;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return lo + x % range;
    }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool coin(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform(0, i - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        Rng r(a ^ (b * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
        return r.next();
    }

private:
    std::uint64_t state_;
};

} // namespace pathlet
