#ifndef MALEX_RNG_HPP
#define MALEX_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace malex {

// Deterministic random source. All randomness in the toolkit flows from a
// single seed through named substreams, so components can be re-run in
// isolation and reruns are byte-identical. The draw helpers are implemented
// here (rather than with std distributions) so the produced sequences are
// fixed by this code alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Derives an independent stream from (seed, name, index).
    static Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the name
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return Rng(mix(mix(seed ^ h) + index));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, bound) via rejection sampling. bound must be > 0.
    std::uint64_t uniform(std::uint64_t bound) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % bound;
    }

    std::size_t index(std::size_t bound) { return static_cast<std::size_t>(uniform(bound)); }

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in random order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k && i < n; ++i) {
            std::size_t j = i + index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace malex

#endif  // MALEX_RNG_HPP
