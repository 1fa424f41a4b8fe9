#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace readorder {

// mt19937_64 with portable helpers: std:: distributions are not specified
// bit-for-bit across standard libraries, these are.
class rng {
public:
    explicit rng(std::uint64_t seed) : engine_(seed) {}
    rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub = 0) {
        std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                          std::uint32_t(stream >> 32), std::uint32_t(sub), std::uint32_t(sub >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = std::uint64_t(hi - lo) + 1;
        if (span == 0) return std::int64_t(next());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return lo + std::int64_t(x % span);
    }

    // Uniform double in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        // Box-Muller; second variate discarded to keep the stream simple.
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[std::size_t(uniform_int(0, std::int64_t(i) - 1))]);
    }

    std::vector<int> permutation(std::size_t n) {
        std::vector<int> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = int(i);
        shuffle(p);
        return p;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace readorder
