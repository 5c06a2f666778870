#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <vector>

namespace itpack {

/// Fixed-size dynamic bitset tuned for the candidate-set operations on the
/// hot path: membership tests, popcount, selecting the j-th set bit, and
/// iterating set bits.
class DynBitset {
public:
    DynBitset() = default;

    explicit DynBitset(std::size_t nbits, bool fill = false)
        : nbits_(nbits), words_((nbits + 63) / 64, fill ? ~0ULL : 0ULL) {
        trim();
    }

    std::size_t size() const { return nbits_; }

    bool test(std::size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1ULL;
    }

    void set(std::size_t i) { words_[i >> 6] |= 1ULL << (i & 63); }

    void reset(std::size_t i) { words_[i >> 6] &= ~(1ULL << (i & 63)); }

    void clear() { std::fill(words_.begin(), words_.end(), 0ULL); }

    std::size_t count() const {
        std::size_t c = 0;
        for (std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    bool any() const {
        for (std::uint64_t w : words_)
            if (w) return true;
        return false;
    }

    /// Index of the j-th set bit (0-based). Requires j < count().
    std::size_t select(std::size_t j) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            const auto pop = static_cast<std::size_t>(std::popcount(words_[wi]));
            if (j < pop) {
                std::uint64_t w = words_[wi];
                for (std::size_t r = 0; r < j; ++r) w &= w - 1; // drop j lowest
                return (wi << 6) + static_cast<std::size_t>(std::countr_zero(w));
            }
            j -= pop;
        }
        assert(false && "select out of range");
        return nbits_;
    }

    template <typename Fn>
    void for_each_set(Fn&& fn) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w) {
                const auto b = static_cast<std::size_t>(std::countr_zero(w));
                fn((wi << 6) + b);
                w &= w - 1;
            }
        }
    }

    friend bool operator==(const DynBitset& a, const DynBitset& b) = default;

private:
    void trim() {
        if (nbits_ & 63) words_.back() &= (1ULL << (nbits_ & 63)) - 1;
    }

    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace itpack
