#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace itpack {

/// All randomness in the library flows through this wrapper. Bounded draws
/// are implemented here (not via std::uniform_int_distribution) so that the
/// same seed produces the same stream on every platform and standard library.
/// The algorithm name below is recorded in output metadata.
inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-streams/v1";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 2^64).
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, bound). bound must be positive. Rejection sampling,
    /// so the result is exactly uniform.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t x = engine_();
            if (x >= threshold) return x % bound;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

    /// Fisher-Yates shuffle of [first, first+n).
    template <typename T>
    void shuffle(T* first, std::size_t n) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Derives an independent substream seed from a master seed plus a tag path,
/// e.g. derive_seed(master, {kStreamIteration, r, t, ell, attempt}).
/// Work scheduled across threads draws only from its own substream, so
/// results do not depend on the worker count.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = master;
    (void)detail::splitmix64(s);
    for (std::uint64_t v : path) {
        s ^= v + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2);
        (void)detail::splitmix64(s);
    }
    return detail::splitmix64(s);
}

inline Rng make_stream(std::uint64_t master,
                       std::initializer_list<std::uint64_t> path) {
    return Rng(derive_seed(master, path));
}

// Stream tags. Values are arbitrary but frozen: changing them changes every
// seeded output.
enum StreamTag : std::uint64_t {
    kStreamGenerator = 0x47454E,
    kStreamIteration = 0x495445,
    kStreamMonitor = 0x4D4F4E,
    kStreamCompletion = 0x434F4D,
    kStreamSplit = 0x53504C,
    kStreamDeletion = 0x44454C,
    kStreamBlock = 0x424C4B,
};

} // namespace itpack
