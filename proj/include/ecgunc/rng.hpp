#pragma once

#include <cmath>
#include <cstdint>

namespace ecgunc {

namespace detail {

// splitmix64 finalizer; the only mixing primitive used anywhere.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Deterministic splitmix64 generator. We roll our own distributions because
/// std::normal_distribution and friends are implementation-defined and the
/// whole pipeline promises byte-identical outputs for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::int64_t uniform_int(std::int64_t n) {
        // Lemire's multiply-shift; bias is < 2^-64 per draw, fine for data shuffling.
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) *
                              static_cast<unsigned __int128>(n);
        return static_cast<std::int64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller with a cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Derive an independent stream from the original seed and a stream id.
    /// fork(i) is a pure function of (seed, i), unaffected by draws made so far.
    Rng fork(std::uint64_t stream_id) const {
        return Rng(detail::mix64(seed_ ^ detail::mix64(stream_id)));
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Counter-based uniform in [0, 1): a pure function of (seed, index).
/// Used for dropout masks so the mask is identical no matter how the
/// elementwise loop is scheduled across threads.
inline double hash_uniform(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t h = detail::mix64(seed ^ detail::mix64(index + 0x632be59bd9b4e019ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

} // namespace ecgunc
