#pragma once

#include <cstdint>

namespace podinn {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, draw index), so parallel consumers never race and the
/// draw order is irrelevant.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(detail::mix64(detail::mix64(seed) ^ (stream * 0xd1342543de82ef95ULL))) {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t draw) const {
        return detail::mix64(key_ ^ (draw * 0x2545f4914f6cdd1dULL));
    }

    /// Uniform double in [0, 1).
    [[nodiscard]] double uniform01(std::uint64_t draw) const {
        return static_cast<double>(bits(draw) >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] double uniform(std::uint64_t draw, double lo, double hi) const {
        return lo + (hi - lo) * uniform01(draw);
    }

    /// Uniform integer in [0, n).
    [[nodiscard]] std::uint64_t below(std::uint64_t draw, std::uint64_t n) const {
        return bits(draw) % n;
    }

private:
    std::uint64_t key_;
};

/// Stateful convenience wrapper that advances its own draw counter.
class DrawStream {
public:
    DrawStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}

    double uniform(double lo, double hi) { return rng_.uniform(next_++, lo, hi); }
    double uniform01() { return rng_.uniform01(next_++); }
    std::uint64_t below(std::uint64_t n) { return rng_.below(next_++, n); }

private:
    CounterRng rng_;
    std::uint64_t next_ = 0;
};

}  // namespace podinn
