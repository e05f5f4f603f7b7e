#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is drawn from a Philox4x32-10 stream
// identified by a 64-bit key.  Keys are derived hierarchically from a user
// seed and integer tags (replication index, subsample index, purpose), so a
// draw depends only on its coordinates and never on execution order.  This
// is what makes multi-threaded benchmarks byte-reproducible.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <vector>

namespace sglarma {

/// SplitMix64 finalizer; used to mix seeds and tags into stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child key from a parent key and a sequence of integer tags.
inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t k = mix64(parent);
    for (auto t : tags) k = mix64(k ^ mix64(t + 0x632be59bd9b4e019ULL));
    return k;
}

/// Stream purposes, used as the first tag when deriving keys.
enum class StreamTag : std::uint64_t {
    simulation = 1,
    subsample = 2,
    cv_folds = 3,
    pipeline = 4,
    replication = 5,
};

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Satisfies UniformRandomBitGenerator with 32-bit output.
class Philox4x32 {
public:
    using result_type = std::uint32_t;

    explicit Philox4x32(std::uint64_t key) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (idx_ == 4) {
            block_ = bijection(counter_, key_);
            increment();
            idx_ = 0;
        }
        return block_[idx_++];
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept {
        const std::uint64_t hi = (*this)() >> 5;  // 27 bits
        const std::uint64_t lo = (*this)() >> 6;  // 26 bits
        return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1).
    double uniform_open() noexcept {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t index(std::uint64_t bound) noexcept {
        const std::uint64_t full = (static_cast<std::uint64_t>((*this)()) << 32) | (*this)();
        if (bound <= 1) return 0;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()
                                    - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v = full;
        while (v >= limit) v = (static_cast<std::uint64_t>((*this)()) << 32) | (*this)();
        return v % bound;
    }

    /// Standard normal via Box-Muller (one value per call, second discarded).
    double normal() noexcept {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Raw block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> bijection(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept {
        constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }

private:
    void increment() noexcept {
        for (auto& c : counter_) {
            if (++c != 0) break;
        }
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_{0, 0, 0, 0};
    std::array<std::uint32_t, 4> block_{};
    int idx_ = 4;
};

/// Stream for (seed, tags...).
inline Philox4x32 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    return Philox4x32(derive_seed(seed, tags));
}

/// In-place Fisher-Yates shuffle driven by `rng`.
template <class T>
void shuffle(std::vector<T>& v, Philox4x32& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.index(i));
        std::swap(v[i - 1], v[j]);
    }
}

/// `k` distinct indices from [0, n), sorted ascending.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Philox4x32& rng) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k && i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.index(n - i));
        std::swap(all[i], all[j]);
    }
    all.resize(std::min(k, n));
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace sglarma
