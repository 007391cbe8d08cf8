#pragma once

#include <cstdint>
#include <string_view>

namespace steprl::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/* splitmix64 finalizer; the workhorse behind both the stream and the
 * split/key derivations. */
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/* FNV-1a over the raw bytes, used to turn stream names into split labels. */
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h = (h ^ static_cast<unsigned char>(c)) * 0x100000001B3ull;
    }
    return h;
}

/* Counter-based splittable generator. Copying one is cheap and copies are
 * independent going forward, which is what makes per-task / per-episode
 * streams reproducible regardless of evaluation order: derive a child with
 * split() instead of sharing a stateful generator.
 */
class SplitRng {
public:
    explicit constexpr SplitRng(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

    /* Child stream keyed by an integer label. Does not advance this stream. */
    [[nodiscard]] constexpr SplitRng split(std::uint64_t label) const noexcept {
        return SplitRng(mix64(state_ ^ (label * 0xD2B74407B1CE6E93ull)));
    }

    /* Child stream keyed by name. */
    [[nodiscard]] constexpr SplitRng split(std::string_view name) const noexcept {
        return split(fnv1a(name));
    }

    /* Uniform in [0, n). Modulo bias is irrelevant at the n used here
     * (single digits) against a 64-bit stream. */
    constexpr std::uint64_t bounded(std::uint64_t n) noexcept {
        return next() % n;
    }

    /* Uniform integer in [lo, hi], inclusive. */
    constexpr int uniform_int(int lo, int hi) noexcept {
        return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /* Uniform double in [0, 1) with 53 random bits. */
    constexpr double uniform01() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace steprl::rng
